#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resv/bcd.hpp"
#include "resv/evaluation.hpp"
#include "resv/topology_io.hpp"

namespace resv {

inline constexpr const char* kConfigSchema = "resv.config/1";

struct EvaluationSettings {
  std::size_t scenarios = 100;
  // Realized demands have means (1 + shift) times the planning means.
  double demand_mean_shift = 0.0;
  std::vector<Algorithm> algorithms{Algorithm::bcd, Algorithm::average_based};
};

/// Run configuration document. Every key but "schema" is optional; unknown keys and
/// out-of-range values raise ConfigError.
struct RunConfig {
  std::uint64_t seed = 0;
  ModelOptions model;
  double kde_beta = 1.0;
  BcdConfig solver;
  SweepSpec sweep;
  EvaluationSettings evaluation;
  std::string output_dir = ".";
};

RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::string& path);
Json run_config_to_json(const RunConfig& config);

}  // namespace resv
