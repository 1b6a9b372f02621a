#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "resv/distributions.hpp"
#include "resv/network.hpp"
#include "resv/parallel.hpp"

namespace resv {

/// d/dt of expected_outage(r, t); <= 0 for rayleigh channels and 0 for
/// deterministic ones. Requires t > 0.
double outage_t_derivative(double r, double t, const ChannelDistribution& channel);

struct RanConfig {
  double t_min = 1e-9;      // MHz; roots below this snap to 0
  double zeta_min = 1e-3;   // floor of the proximal coefficients
  std::size_t zeta_samples = 8;
  double tolerance = 1e-7;  // stop when ||t^{j+1} - t^j||_2 < tolerance
  std::size_t max_iterations = 200;
  std::size_t max_bracket_doublings = 64;
  int root_bits = 48;
};

/// One downlink's data for a per-AP solve. `rates` lists the rates whose
/// outages are charged to this downlink: one summed rate when paths share the
/// downlink's resource, or one entry per path otherwise.
struct ApDownlink {
  std::vector<double> rates;
  double theta = 0.0;
  double anchor = 0.0;  // proximal center t^j
  double zeta = 1e-3;
  const ChannelDistribution* channel = nullptr;
};

struct ApSolution {
  std::vector<double> t;
  std::vector<double> beta;
  double lambda = 0.0;
};

/// Minimizes sum_i theta_i [O_i(t_i) + zeta_i/2 (t_i - anchor_i)^2] subject to
/// sum t_i <= budget, t >= 0, by bisection on the budget multiplier. When
/// theta_i = 0 the proximal term is kept with weight zeta_i alone so that the
/// subproblem stays strictly convex.
ApSolution solve_per_ap(std::span<const ApDownlink> downlinks, double budget,
                        const RanConfig& config);

/// Proximal coefficient: the larger of zeta_min and the most negative slope of
/// outage_t_derivative sampled on [t_min, budget].
double proximal_coefficient(std::span<const double> rates, const ChannelDistribution& channel,
                            double budget, const RanConfig& config);

struct RanInput {
  // Per downlink: charged rates (see ApDownlink), user weight, channel.
  std::vector<std::vector<double>> rates;
  std::vector<double> theta;
  std::vector<ChannelDistribution> channels;
};

/// sum_w theta_w sum_i expected_outage(rates_w[i], t_w).
double ran_objective(const RanInput& input, std::span<const double> t);

struct RanResult {
  std::vector<double> t;
  std::vector<double> lambda;  // by node id
  std::vector<double> beta;    // by downlink id
  std::size_t iterations = 0;
  double movement = 0.0;
  std::vector<double> objective;  // true objective after each iteration
};

/// Proximal BSUM over all APs in parallel. start must be feasible. With
/// deterministic channels there is no outage term; the result is the
/// Euclidean projection of `start` onto {t >= rate/efficiency, sum t <= C_b}.
RanResult ran_bsum(const Topology& topology, const RanInput& input, std::span<const double> start,
                   const RanConfig& config, WorkerPool* pool = nullptr);

/// Largest |theta D + lambda - beta| over downlinks, the t-block stationarity residual.
double ran_stationarity(const Topology& topology, const RanInput& input,
                        std::span<const double> t, std::span<const double> lambda);

}  // namespace resv
