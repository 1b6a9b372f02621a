#include "resv/ran.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "resv/errors.hpp"
#include "resv/quadrature.hpp"

namespace resv {

namespace {

struct BracketTolerance {
  double scale;
  bool operator()(double a, double b) const {
    return std::abs(b - a) <= scale * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  }
};

double total_outage_derivative(std::span<const double> rates, double t,
                               const ChannelDistribution& ch) {
  double d = 0.0;
  for (double r : rates) d += outage_t_derivative(r, t, ch);
  return d;
}

double required_resource(const ApDownlink& w) {
  double s = 0.0;
  for (double r : w.rates) s += r;
  return s / w.channel->spectral_efficiency();
}

// Surrogate derivative in t, nondecreasing because the outage is convex in t.
struct DownlinkSurrogate {
  const ApDownlink& w;
  double weight;  // multiplies zeta; theta, or 1 when theta = 0

  explicit DownlinkSurrogate(const ApDownlink& d) : w(d), weight(d.theta > 0.0 ? d.theta : 1.0) {}

  double operator()(double t, double lambda) const {
    double g = weight * w.zeta * (t - w.anchor) + lambda;
    if (w.theta > 0.0) g += w.theta * total_outage_derivative(w.rates, t, *w.channel);
    return g;
  }
};

// t(lambda) for one downlink and the matching beta.
std::pair<double, double> downlink_resource(const ApDownlink& w, double lambda, double budget,
                                            const RanConfig& config) {
  const DownlinkSurrogate h(w);
  const double lo = std::min(config.t_min, budget);
  const double h_lo = h(lo, lambda);
  if (h_lo >= 0.0) return {0.0, h_lo};
  // The budget multiplier handles sum t <= C_b, so the root may lie beyond C_b.
  double hi = std::max(budget, lo);
  double h_hi = h(hi, lambda);
  for (std::size_t k = 0; h_hi < 0.0; ++k) {
    if (k >= config.max_bracket_doublings) {
      throw NonConvergenceError("downlink resource bracket exhausted", k, h_hi);
    }
    hi *= 2.0;
    h_hi = h(hi, lambda);
  }
  if (h_hi == 0.0) return {hi, 0.0};
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&](double t) { return h(t, lambda); }, lo, hi, h_lo, h_hi,
      BracketTolerance{std::ldexp(1.0, 1 - config.root_bits)}, iters);
  return {0.5 * (a + b), 0.0};
}

std::vector<double> project_deterministic(std::span<const ApDownlink> dls, double budget) {
  const std::size_t n = dls.size();
  std::vector<double> lb(n);
  std::vector<double> t(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lb[i] = required_resource(dls[i]);
    t[i] = std::max(lb[i], dls[i].anchor);
    total += t[i];
  }
  if (total <= budget) return t;
  auto sum_at = [&](double nu) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::max(lb[i], dls[i].anchor - nu);
    return s;
  };
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& w : dls) hi = std::max(hi, w.anchor);
  if (sum_at(hi) > budget) return lb;  // rates exceed the budget; nothing to trade
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++k) {
    const double mid = 0.5 * (lo + hi);
    (sum_at(mid) > budget ? lo : hi) = mid;
  }
  for (std::size_t i = 0; i < n; ++i) t[i] = std::max(lb[i], dls[i].anchor - hi);
  return t;
}

}  // namespace

double outage_t_derivative(double r, double t, const ChannelDistribution& channel) {
  if (!(t > 0.0)) throw std::domain_error("outage_t_derivative: resource must be positive");
  if (!(r >= 0.0)) throw std::domain_error("outage_t_derivative: rate must be nonnegative");
  if (r == 0.0 || channel.kind() == ChannelKind::deterministic) return 0.0;
  // O(r, t) = t O1(r/t) with O1(x) = x - e^a (E1(a) - E1(a 2^x)) / ln 2 and
  // a = 1/snr, hence dO/dt = O1(x) - x Z(x, 1).
  const double a = 1.0 / channel.mean_snr();
  if (a < 700.0) {
    const double x = r / t;
    const double log_b = x * std::numbers::ln2 + std::log(a);
    const double e1a = boost::math::expint(1, a);
    const double e1b = log_b > std::log(750.0) ? 0.0 : boost::math::expint(1, std::exp(log_b));
    const double o1 = x - std::exp(a) * (e1a - e1b) / std::numbers::ln2;
    return std::min(0.0, o1 - x * channel.cdf(r, t));
  }
  // Z = 1 past saturation, so dZ/dt vanishes there.
  const double upper = std::min(r, channel.saturation_rate(t));
  const double median = t * std::log2(1.0 + channel.mean_snr() * std::numbers::ln2);
  const double cuts[] = {median};
  return quad::integrate([&](double v) { return channel.cdf_dt(v, t); }, 0.0, upper, cuts);
}

double proximal_coefficient(std::span<const double> rates, const ChannelDistribution& channel,
                            double budget, const RanConfig& config) {
  if (channel.kind() == ChannelKind::deterministic || !(budget > config.t_min)) {
    return config.zeta_min;
  }
  const std::size_t n = std::max<std::size_t>(config.zeta_samples, 2);
  double prev_t = config.t_min;
  double prev_d = total_outage_derivative(rates, prev_t, channel);
  double worst = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double t = config.t_min + (budget - config.t_min) * double(k) / double(n - 1);
    const double d = total_outage_derivative(rates, t, channel);
    worst = std::min(worst, (d - prev_d) / (t - prev_t));
    prev_t = t;
    prev_d = d;
  }
  return std::max(config.zeta_min, -worst);
}

ApSolution solve_per_ap(std::span<const ApDownlink> dls, double budget, const RanConfig& config) {
  const std::size_t n = dls.size();
  ApSolution sol;
  sol.t.assign(n, 0.0);
  sol.beta.assign(n, 0.0);
  if (n == 0) return sol;
  if (!(budget >= 0.0)) throw std::invalid_argument("solve_per_ap: negative budget");
  for (const auto& w : dls) {
    if (!w.channel) throw std::invalid_argument("solve_per_ap: downlink without channel");
    if (!(w.zeta > 0.0)) throw std::invalid_argument("solve_per_ap: zeta must be positive");
  }
  if (budget == 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      sol.beta[i] = std::max(0.0, DownlinkSurrogate(dls[i])(config.t_min, 0.0));
    }
    return sol;
  }

  auto allocate = [&](double lambda, bool store) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [t, beta] = downlink_resource(dls[i], lambda, budget, config);
      total += t;
      if (store) {
        sol.t[i] = t;
        sol.beta[i] = beta;
      }
    }
    return total;
  };

  if (allocate(0.0, true) <= budget) return sol;

  double lambda_max = 0.0;
  for (const auto& w : dls) {
    const double weight = w.theta > 0.0 ? w.theta : 1.0;
    double d = 0.0;
    if (w.theta > 0.0) d = std::abs(w.theta * total_outage_derivative(w.rates, config.t_min, *w.channel));
    lambda_max = std::max(lambda_max, d + weight * w.zeta * w.anchor);
  }
  double lo = 0.0;
  double hi = std::max(lambda_max, 1e-12);
  double excess_hi = allocate(hi, false) - budget;
  std::size_t doublings = 0;
  while (excess_hi > 0.0) {
    if (++doublings > config.max_bracket_doublings) {
      throw NonConvergenceError("AP multiplier bracket exhausted", doublings, excess_hi);
    }
    lo = hi;
    hi *= 2.0;
    excess_hi = allocate(hi, false) - budget;
  }
  const double excess_lo = allocate(lo, false) - budget;
  double lambda = hi;
  if (excess_hi < 0.0) {
    std::uintmax_t iters = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(
        [&](double l) { return allocate(l, false) - budget; }, lo, hi, excess_lo, excess_hi,
        BracketTolerance{std::ldexp(1.0, 1 - config.root_bits)}, iters);
    (void)a;
    lambda = b;
  }
  allocate(lambda, true);
  sol.lambda = lambda;
  // Guard against round-off in the sum; the feasible side is taken above.
  double total = 0.0;
  for (double t : sol.t) total += t;
  if (total > budget) {
    const double scale = budget / total;
    for (double& t : sol.t) t *= scale;
  }
  return sol;
}

double ran_objective(const RanInput& input, std::span<const double> t) {
  double s = 0.0;
  for (std::size_t w = 0; w < t.size(); ++w) {
    if (input.theta[w] == 0.0) continue;
    for (double r : input.rates[w]) s += input.theta[w] * expected_outage(r, t[w], input.channels[w]);
  }
  return s;
}

RanResult ran_bsum(const Topology& topology, const RanInput& input, std::span<const double> start,
                   const RanConfig& config, WorkerPool* pool) {
  const std::size_t n_w = topology.downlinks.size();
  if (start.size() != n_w || input.rates.size() != n_w || input.theta.size() != n_w ||
      input.channels.size() != n_w) {
    throw std::invalid_argument("ran_bsum: per-downlink inputs have the wrong size");
  }
  const auto& aps = topology.access_points();

  // Proximal coefficients depend only on the fixed rates.
  std::vector<double> zeta(n_w, config.zeta_min);
  parallel_for(pool, n_w, [&](std::size_t w) {
    const double budget = topology.nodes[topology.downlinks[w].ap].budget;
    zeta[w] = proximal_coefficient(input.rates[w], input.channels[w], budget, config);
  });

  RanResult result;
  result.t.assign(start.begin(), start.end());
  result.lambda.assign(topology.nodes.size(), 0.0);
  result.beta.assign(n_w, 0.0);
  std::vector<double> next(n_w, 0.0);
  std::vector<double> next_lambda(topology.nodes.size(), 0.0);
  std::vector<double> next_beta(n_w, 0.0);
  // Anchors are extrapolated from the last two accepted iterates; a step
  // that raises the objective is dropped and the extrapolation restarts.
  std::vector<double> anchor = result.t;
  double value = ran_objective(input, result.t);
  double tau = 1.0;

  for (std::size_t j = 1; j <= config.max_iterations; ++j) {
    parallel_for(pool, aps.size(), [&](std::size_t i) {
      const int b = aps[i];
      const auto& ids = topology.downlinks_at(b);
      std::vector<ApDownlink> dls(ids.size());
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const int w = ids[k];
        dls[k].rates = input.rates[w];
        dls[k].theta = input.theta[w];
        dls[k].anchor = anchor[w];
        dls[k].zeta = zeta[w];
        dls[k].channel = &input.channels[w];
      }
      const double budget = topology.nodes[b].budget;
      bool deterministic = !ids.empty();
      for (const auto& d : dls) deterministic &= d.channel->kind() == ChannelKind::deterministic;
      if (deterministic) {
        const std::vector<double> t = project_deterministic(dls, budget);
        for (std::size_t k = 0; k < ids.size(); ++k) {
          next[ids[k]] = t[k];
          next_beta[ids[k]] = 0.0;
        }
        next_lambda[b] = 0.0;
        return;
      }
      ApSolution s = solve_per_ap(dls, budget, config);
      for (std::size_t k = 0; k < ids.size(); ++k) {
        next[ids[k]] = s.t[k];
        next_beta[ids[k]] = s.beta[k];
      }
      next_lambda[b] = s.lambda;
    });

    double move = 0.0;
    for (std::size_t w = 0; w < n_w; ++w) move += (next[w] - anchor[w]) * (next[w] - anchor[w]);
    result.movement = std::sqrt(move);
    result.iterations = j;
    const double next_value = ran_objective(input, next);
    const bool improved = next_value <= value + 1e-12 * (1.0 + std::abs(value));
    std::vector<double> prev = result.t;
    if (improved) {
      result.t = next;
      result.lambda = next_lambda;
      result.beta = next_beta;
      value = next_value;
    }
    result.objective.push_back(value);
    if (result.movement < config.tolerance) return result;
    if (improved) {
      const double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
      const double momentum = (tau - 1.0) / tau_next;
      for (std::size_t w = 0; w < n_w; ++w) {
        anchor[w] = std::max(0.0, result.t[w] + momentum * (result.t[w] - prev[w]));
      }
      tau = tau_next;
    } else {
      anchor = result.t;
      tau = 1.0;
    }
  }
  throw NonConvergenceError("RAN allocation did not converge", result.iterations, result.movement);
}

double ran_stationarity(const Topology& topology, const RanInput& input,
                        std::span<const double> t, std::span<const double> lambda) {
  double worst = 0.0;
  for (const auto& w : topology.downlinks) {
    const auto& ch = input.channels[w.id];
    if (ch.kind() == ChannelKind::deterministic) continue;
    const double tt = std::max(t[w.id], 1e-9);
    double g = lambda[w.ap];
    if (input.theta[w.id] > 0.0) g += input.theta[w.id] * total_outage_derivative(input.rates[w.id], tt, ch);
    const double res = t[w.id] > 0.0 ? std::abs(g) : std::max(0.0, -g);
    worst = std::max(worst, res);
  }
  return worst;
}

}  // namespace resv
