#pragma once

#include <span>
#include <string>
#include <vector>

#include "resv/bcd.hpp"
#include "resv/evaluation.hpp"
#include "resv/kde.hpp"
#include "resv/topology_io.hpp"

namespace resv {

inline constexpr const char* kReportSchema = "resv.report/1";
inline constexpr const char* kEvaluationSchema = "resv.evaluation/1";
inline constexpr const char* kDeliveryRule =
    "delivered_k = min(d_k, sum_p min(r_p, v_w * r_p / sum of reserved rates on w))";

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// Run report of one solve. The objective decomposition uses `models`; the
/// outage entries are omitted when every theta is zero. Wall times are not
/// included so that reports are reproducible.
Json solve_report(const Topology& topology, const Models& models, Algorithm algorithm,
                  const BcdResult& result, bool shared_downlink = false);

/// iteration,objective,expected_traffic,expected_outage,r_movement,t_movement,
/// surrogate_iterations,routing_iterations,ran_iterations
std::string trace_csv(const BcdTrace& trace);

/// One row per (cell, algorithm).
std::string sweep_csv(std::span<const SweepRow> rows);

Json evaluation_json(const EvaluationReport& report);
/// algorithm,scenario,ratio
std::string evaluation_csv(const EvaluationReport& report);

/// x,density on the estimator grid.
std::string density_csv(const RecursiveKde& kde);

}  // namespace resv
