#include "resv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "resv/baselines.hpp"
#include "resv/errors.hpp"

namespace resv {

namespace {

// Uniform in (0, 1) from the top 53 bits; never 0 or 1.
double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double total(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bcd:
      return "bcd";
    case Algorithm::single_path:
      return "single-path";
    case Algorithm::average_based:
      return "average-based";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "bcd") return Algorithm::bcd;
  if (name == "single-path") return Algorithm::single_path;
  if (name == "average-based") return Algorithm::average_based;
  throw ConfigError("unknown algorithm '" + name + "'");
}

BcdResult run_algorithm(Algorithm algorithm, const Topology& topology, const Models& models,
                        const BcdConfig& config, WorkerPool* pool) {
  switch (algorithm) {
    case Algorithm::bcd:
      return bcd_solve(topology, models, config, pool);
    case Algorithm::single_path:
      return single_path_solve(topology, models, config, pool);
    case Algorithm::average_based:
      return average_based_solve(topology, models, config, pool);
  }
  throw std::logic_error("run_algorithm: bad algorithm");
}

Models build_models(const Topology& topology, const ModelOptions& options) {
  Models m = options.deterministic ? Models::deterministic_from_topology(topology)
                                   : Models::from_topology(topology);
  if (options.theta) m.theta.assign(m.theta.size(), *options.theta);
  return m;
}

Models scale_demand_means(const Models& models, double factor) {
  if (!(factor > 0.0)) throw ConfigError("demand mean factor must be positive");
  Models m = models;
  for (auto& d : m.demand) {
    switch (d.kind()) {
      case DemandKind::lognormal:
        d = DemandDistribution::lognormal(d.eta() + std::log(factor), d.sigma());
        break;
      case DemandKind::point_mass:
        d = DemandDistribution::point_mass(d.atom() * factor);
        break;
      case DemandKind::empirical:
        throw ConfigError("cannot shift the mean of an empirical demand");
    }
  }
  return m;
}

std::uint64_t scenario_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Scenario realize_scenario(const Topology& topology, const Models& models,
                          const Reservation& reservation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.seed = seed;
  for (const auto& u : topology.users) s.demand.push_back(models.demand[u.id].sample(open_uniform(rng)));
  for (const auto& w : topology.downlinks) {
    const double u = open_uniform(rng);
    const double t = reservation.t[w.id];
    s.capacity.push_back(t > 0.0 ? models.channels[w.id].sample(t, u) : 0.0);
  }
  return s;
}

double score_scenario(const Topology& topology, const Reservation& reservation,
                      const Scenario& scenario) {
  std::vector<double> downlink_load(topology.downlinks.size(), 0.0);
  for (const auto& p : topology.paths) downlink_load[p.downlink] += reservation.r[p.id];
  double delivered = 0.0;
  double demand = 0.0;
  for (const auto& u : topology.users) {
    double supply = 0.0;
    for (int p : u.paths) {
      const double r = reservation.r[p];
      if (r <= 0.0) continue;
      const int w = topology.paths[p].downlink;
      const double share = scenario.capacity[w] * r / downlink_load[w];
      supply += std::min(r, share);
    }
    delivered += std::min(scenario.demand[u.id], supply);
    demand += scenario.demand[u.id];
  }
  if (demand <= 0.0) return 1.0;
  return std::clamp(delivered / demand, 0.0, 1.0);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

EvaluationReport run_robustness(const Topology& topology, const Models& models,
                                const std::vector<Algorithm>& algorithms,
                                const RobustnessOptions& options, const BcdConfig& config,
                                WorkerPool* pool) {
  if (options.scenarios == 0) throw ConfigError("at least one scenario is required");
  const Models& truth = options.scenario_models ? *options.scenario_models : models;
  truth.validate(topology);
  EvaluationReport report;
  report.scenarios = options.scenarios;
  report.seed = options.seed;
  for (Algorithm a : algorithms) {
    BcdResult res = run_algorithm(a, topology, models, config, pool);
    AlgorithmEvaluation ev;
    ev.algorithm = a;
    ev.converged = res.converged;
    ev.iterations = res.iterations;
    ev.terms = objective_terms(topology, res.reservation, models, options.shared_downlink);
    ev.reserved_rate = total(res.reservation.r);
    ev.reserved_bandwidth = total(res.reservation.t);
    ev.reservation = std::move(res.reservation);
    ev.ratios.assign(options.scenarios, 0.0);
    parallel_for(pool, options.scenarios, [&](std::size_t i) {
      const Scenario s =
          realize_scenario(topology, truth, ev.reservation, scenario_seed(options.seed, i));
      ev.ratios[i] = score_scenario(topology, ev.reservation, s);
    });
    std::vector<double> sorted = ev.ratios;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      ev.cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    ev.median = median(sorted);
    report.algorithms.push_back(std::move(ev));
  }
  return report;
}

Topology with_ap_budget(const Topology& topology, double budget) {
  if (!(budget >= 0.0)) throw ConfigError("AP budget must be nonnegative");
  Topology t = topology;
  for (auto& n : t.nodes) {
    if (n.kind == NodeKind::access_point) n.budget = budget;
  }
  t.build_index();
  return t;
}

Topology with_eta_mean(const Topology& topology, double eta_mean) {
  Topology t = topology;
  double sum = 0.0;
  for (const auto& u : t.users) {
    if (u.demand.kind() != DemandKind::lognormal) {
      throw ConfigError("eta sweeps need lognormal demands");
    }
    sum += u.demand.eta();
  }
  const double shift = t.users.empty() ? 0.0 : eta_mean - sum / static_cast<double>(t.users.size());
  for (auto& u : t.users) {
    u.demand = DemandDistribution::lognormal(u.demand.eta() + shift, u.demand.sigma());
  }
  t.build_index();
  return t;
}

std::vector<SweepRow> run_sweep(const Topology& topology, const ModelOptions& model_options,
                                const SweepSpec& spec, const BcdConfig& config,
                                WorkerPool* pool) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> budgets = spec.ap_budgets.empty() ? std::vector<double>{nan} : spec.ap_budgets;
  const std::vector<double> etas = spec.eta_means.empty() ? std::vector<double>{nan} : spec.eta_means;
  std::vector<SweepRow> rows;
  for (double b : budgets) {
    const Topology tb = std::isnan(b) ? topology : with_ap_budget(topology, b);
    for (double e : etas) {
      const Topology cell = std::isnan(e) ? tb : with_eta_mean(tb, e);
      const Models models = build_models(cell, model_options);
      for (Algorithm a : spec.algorithms) {
        BcdResult res = run_algorithm(a, cell, models, config, pool);
        SweepRow row;
        row.algorithm = a;
        row.ap_budget = b;
        row.eta_mean = e;
        row.terms = objective_terms(cell, res.reservation, models, config.shared_downlink);
        row.reserved_rate = total(res.reservation.r);
        row.reserved_bandwidth = total(res.reservation.t);
        row.iterations = res.iterations;
        row.converged = res.converged;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace resv
