#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resv/bcd.hpp"

namespace resv {

enum class Algorithm { bcd, single_path, average_based };

const char* to_string(Algorithm algorithm);
/// "bcd", "single-path" or "average-based"; ConfigError otherwise.
Algorithm algorithm_from_string(const std::string& name);

BcdResult run_algorithm(Algorithm algorithm, const Topology& topology, const Models& models,
                        const BcdConfig& config, WorkerPool* pool = nullptr);

/// How models are built from a topology for a run.
struct ModelOptions {
  bool deterministic = false;   // channels with efficiency log2(1 + snr)
  std::optional<double> theta;  // overrides every user's weight
};

Models build_models(const Topology& topology, const ModelOptions& options);

/// Multiplies every demand mean by `factor` (eta += ln factor for lognormal).
/// Empirical demands raise ConfigError.
Models scale_demand_means(const Models& models, double factor);

/// One Monte-Carlo realization.
struct Scenario {
  std::uint64_t seed = 0;
  std::vector<double> demand;    // by user id
  std::vector<double> capacity;  // realized downlink rate, by downlink id
};

/// Demands from the demand models and downlink rates sampled at the reserved
/// resources (zero where t = 0). Deterministic in `seed`.
Scenario realize_scenario(const Topology& topology, const Models& models,
                          const Reservation& reservation, std::uint64_t seed);

/// Delivered traffic over demand. A user delivers
///   min(d_k, sum_p min(r_p, v_w r_p / sum_{q on w} r_q));
/// zero total demand scores 1.
double score_scenario(const Topology& topology, const Reservation& reservation,
                      const Scenario& scenario);

/// Seed of scenario `index` in the stream started by `seed`.
std::uint64_t scenario_seed(std::uint64_t seed, std::size_t index);

struct AlgorithmEvaluation {
  Algorithm algorithm = Algorithm::bcd;
  Reservation reservation;
  bool converged = false;
  std::size_t iterations = 0;
  ObjectiveTerms terms;  // under the planning models
  double reserved_rate = 0.0;
  double reserved_bandwidth = 0.0;
  std::vector<double> ratios;                     // by scenario index
  std::vector<std::pair<double, double>> cdf;     // (ratio, probability), sorted
  double median = 0.0;
};

struct RobustnessOptions {
  std::size_t scenarios = 100;
  std::uint64_t seed = 0;
  // Demand models of the realizations; defaults to the planning models.
  std::optional<Models> scenario_models;
  bool shared_downlink = false;
};

struct EvaluationReport {
  std::size_t scenarios = 0;
  std::uint64_t seed = 0;
  std::vector<AlgorithmEvaluation> algorithms;
};

/// Solves once per algorithm and scores every algorithm on the same scenarios.
EvaluationReport run_robustness(const Topology& topology, const Models& models,
                                const std::vector<Algorithm>& algorithms,
                                const RobustnessOptions& options, const BcdConfig& config,
                                WorkerPool* pool = nullptr);

double median(std::vector<double> values);

struct SweepSpec {
  std::vector<double> ap_budgets;  // MHz; empty keeps the topology's budgets
  std::vector<double> eta_means;   // mean of the users' eta; empty keeps them
  std::vector<Algorithm> algorithms{Algorithm::bcd, Algorithm::single_path};
};

struct SweepRow {
  Algorithm algorithm = Algorithm::bcd;
  double ap_budget = 0.0;  // NaN when the axis is empty
  double eta_mean = 0.0;
  ObjectiveTerms terms;
  double reserved_rate = 0.0;
  double reserved_bandwidth = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Topology with every AP budget set to `budget`.
Topology with_ap_budget(const Topology& topology, double budget);
/// Topology with lognormal etas shifted so that their mean equals `eta_mean`.
Topology with_eta_mean(const Topology& topology, double eta_mean);

/// Cross product of the axes, budget-major; per cell one row per algorithm.
std::vector<SweepRow> run_sweep(const Topology& topology, const ModelOptions& models,
                                const SweepSpec& spec, const BcdConfig& config,
                                WorkerPool* pool = nullptr);

}  // namespace resv
