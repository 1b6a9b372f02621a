#include "resv/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "resv/errors.hpp"

namespace resv {

namespace {

// Stop once the bracket is a few ulps wide (absolute near zero).
struct BracketTolerance {
  double scale;
  bool operator()(double a, double b) const {
    return std::abs(b - a) <= scale * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  }
};

BracketTolerance bracket_tolerance(int bits) { return {std::ldexp(1.0, 1 - bits)}; }

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double distance2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Costs

double PathCost::solve_derivative(double slope, double lo, double hi) const {
  auto g = [&](double r) { return derivative(r) + slope; };
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi),
                                                        bracket_tolerance(52), iters);
  return 0.5 * (a + b);
}

QuadraticCost::QuadraticCost(double curvature, double linear, double constant)
    : curvature_(curvature), linear_(linear), constant_(constant) {
  if (!(curvature >= 0.0)) throw std::invalid_argument("QuadraticCost: negative curvature");
}

double QuadraticCost::value(double r) const {
  return 0.5 * curvature_ * r * r + linear_ * r + constant_;
}

double QuadraticCost::derivative(double r) const { return curvature_ * r + linear_; }

double QuadraticCost::solve_derivative(double slope, double lo, double hi) const {
  return std::clamp(-(slope + linear_) / curvature_, lo, hi);
}

FunctionCost::FunctionCost(std::function<double(double)> value,
                           std::function<double(double)> derivative, bool strictly_convex)
    : value_(std::move(value)), derivative_(std::move(derivative)), strict_(strictly_convex) {}

ProximalCost::ProximalCost(CostPtr base, double kappa, double anchor)
    : base_(std::move(base)), kappa_(kappa), anchor_(anchor) {
  if (!(kappa > 0.0)) throw std::invalid_argument("ProximalCost: kappa must be positive");
}

double ProximalCost::value(double r) const {
  return base_->value(r) + 0.5 * kappa_ * (r - anchor_) * (r - anchor_);
}

double ProximalCost::derivative(double r) const {
  return base_->derivative(r) + kappa_ * (r - anchor_);
}

// ---------------------------------------------------------------------------
// Problem

RoutingProblem RoutingProblem::from_topology(const Topology& topology) {
  RoutingProblem problem;
  problem.flows = topology.paths.size();
  for (const auto& link : topology.links) {
    ConstraintRow row;
    row.capacity = link.capacity;
    row.flows = topology.paths_on_link(link.id);
    row.coeff.assign(row.flows.size(), 1.0);
    problem.rows.push_back(std::move(row));
  }
  problem.finalize();
  return problem;
}

void RoutingProblem::add_row(ConstraintRow row) { rows.push_back(std::move(row)); }

void RoutingProblem::finalize() {
  flow_rows.assign(flows, {});
  for (std::size_t l = 0; l < rows.size(); ++l) {
    const auto& row = rows[l];
    if (row.flows.size() != row.coeff.size()) {
      throw StructuralError("row " + std::to_string(l) + " has mismatched flows/coefficients");
    }
    if (!(row.capacity >= 0.0) || !std::isfinite(row.capacity)) {
      throw StructuralError("row " + std::to_string(l) + " needs a finite nonnegative capacity");
    }
    for (std::size_t i = 0; i < row.flows.size(); ++i) {
      const int f = row.flows[i];
      if (f < 0 || static_cast<std::size_t>(f) >= flows) {
        throw StructuralError("row " + std::to_string(l) + " references an unknown flow");
      }
      if (!(row.coeff[i] > 0.0) || !std::isfinite(row.coeff[i])) {
        throw StructuralError("row " + std::to_string(l) + " has a nonpositive coefficient");
      }
      flow_rows[f].push_back({static_cast<int>(l), static_cast<int>(i)});
    }
  }
  for (std::size_t f = 0; f < flows; ++f) {
    if (flow_rows[f].empty()) {
      throw StructuralError("flow " + std::to_string(f) + " lies on no constraint row");
    }
  }
}

// ---------------------------------------------------------------------------
// Per-link solve

namespace {

struct RowEvaluator {
  const ConstraintRow& row;
  std::span<const double> alpha;
  std::span<const PathCost* const> costs;
  std::vector<double> d0;  // psi'(0)
  std::vector<double> du;  // psi'(C/a)
  std::vector<double> upper;
  std::size_t evaluations = 0;

  RowEvaluator(const ConstraintRow& r, std::span<const double> a,
               std::span<const PathCost* const> c)
      : row(r), alpha(a), costs(c) {
    const std::size_t n = row.flows.size();
    d0.resize(n);
    du.resize(n);
    upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      upper[i] = row.capacity / row.coeff[i];
      d0[i] = costs[i]->derivative(0.0);
      du[i] = costs[i]->derivative(upper[i]);
    }
  }

  // Minimizer of alpha psi(r) + mu a r on [0, C/a]; `excess` > 0 when the
  // unconstrained root lies beyond the cap.
  double rate(std::size_t i, double mu, double& excess) {
    const double s = mu * row.coeff[i] / alpha[i];
    excess = 0.0;
    if (d0[i] + s >= 0.0) return 0.0;
    if (du[i] + s <= 0.0) {
      excess = -(du[i] + s);
      return upper[i];
    }
    ++evaluations;
    return costs[i]->solve_derivative(s, 0.0, upper[i]);
  }

  // Continuous, nonincreasing in mu; feasible exactly where <= 0.
  double excess(double mu, std::vector<double>* rates = nullptr) {
    double load = 0.0;
    double over = 0.0;
    for (std::size_t i = 0; i < row.flows.size(); ++i) {
      double e = 0.0;
      const double r = rate(i, mu, e);
      if (rates) (*rates)[i] = r;
      load += row.coeff[i] * r;
      over += e;
    }
    return (load - row.capacity) + over;
  }
};

}  // namespace

LinkSolution solve_per_link(const ConstraintRow& row, std::span<const double> alpha,
                            std::span<const PathCost* const> costs, const RoutingConfig& config,
                            double mu_hint) {
  const std::size_t n = row.flows.size();
  if (alpha.size() != n || costs.size() != n) {
    throw std::invalid_argument("solve_per_link: alpha/costs do not match the row");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("solve_per_link: alpha weights must be positive");
  }

  RowEvaluator ev(row, alpha, costs);
  LinkSolution sol;
  sol.r.assign(n, 0.0);
  sol.phi.assign(n, 0.0);

  double mu = 0.0;
  const double q0 = ev.excess(0.0, &sol.r);
  if (q0 > 0.0) {
    double lo = 0.0;
    double hi = 1.0;
    double qlo = q0;
    double qhi = 0.0;
    std::size_t doublings = 0;
    if (mu_hint > 0.0) {
      const double qh = ev.excess(mu_hint);
      if (qh > 0.0) {
        lo = mu_hint;
        qlo = qh;
        hi = 2.0 * mu_hint;
      } else {
        hi = mu_hint;
        qhi = qh;
        lo = 0.5 * mu_hint;
        qlo = ev.excess(lo);
        for (std::size_t k = 0; qlo <= 0.0 && k < config.max_bracket_doublings; ++k) {
          hi = lo;
          qhi = qlo;
          lo *= 0.5;
          qlo = ev.excess(lo);
        }
        if (qlo <= 0.0) {
          lo = 0.0;
          qlo = q0;
        }
      }
    }
    if (!(mu_hint > 0.0) || lo == mu_hint) {
      qhi = ev.excess(hi);
      while (qhi > 0.0) {
        if (++doublings > config.max_bracket_doublings) {
          throw NonConvergenceError("per-link multiplier bracket exhausted", doublings, qhi);
        }
        lo = hi;
        qlo = qhi;
        hi *= 2.0;
        qhi = ev.excess(hi);
      }
    }
    if (qhi == 0.0) {
      mu = hi;
    } else {
      std::uintmax_t iters = 300;
      const auto [a, b] = boost::math::tools::toms748_solve(
          [&](double m) { return ev.excess(m); }, lo, hi, qlo, qhi,
          bracket_tolerance(config.root_bits), iters);
      (void)a;
      mu = b;
    }
    ev.excess(mu, &sol.r);
  }
  sol.mu = mu;
  for (std::size_t i = 0; i < n; ++i) {
    if (sol.r[i] == 0.0) sol.phi[i] = ev.d0[i] + mu * row.coeff[i] / alpha[i];
  }
  sol.evaluations = ev.evaluations;
  return sol;
}

std::vector<double> compute_alpha(std::span<const double> mu, std::span<const double> coeff) {
  if (mu.empty()) throw StructuralError("compute_alpha: empty path");
  if (coeff.size() != mu.size()) throw std::invalid_argument("compute_alpha: size mismatch");
  std::vector<double> w(mu.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0)) throw std::domain_error("compute_alpha: negative multiplier");
    w[i] = mu[i] * coeff[i];
    total += w[i];
  }
  if (total > 0.0) {
    for (auto& x : w) x /= total;
  } else {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  }
  return w;
}

// ---------------------------------------------------------------------------
// Dual decomposition over links

namespace {

// Projected unconstrained minimizer of psi_f on [0, min_l C_l / a_lf].
double unconstrained_rate(const RoutingProblem& problem, const PathCost& cost, std::size_t f) {
  double cap = std::numeric_limits<double>::infinity();
  for (auto [l, pos] : problem.flow_rows[f]) {
    cap = std::min(cap, problem.rows[l].capacity / problem.rows[l].coeff[pos]);
  }
  if (cost.derivative(0.0) >= 0.0) return 0.0;
  if (cost.derivative(cap) <= 0.0) return cap;
  return cost.solve_derivative(0.0, 0.0, cap);
}

double row_load(const ConstraintRow& row, std::span<const double> r) {
  double load = 0.0;
  for (std::size_t i = 0; i < row.flows.size(); ++i) load += row.coeff[i] * r[row.flows[i]];
  return load;
}

// Multipliers this small carry no information at double precision and their
// alpha shares underflow; such rows are treated like pruned rows.
constexpr double kMuFloor = 1e-200;
// A row restored this many times is never pruned again, which bounds the
// number of prune/restore rounds.
constexpr int kMaxRestores = 3;

}  // namespace

RoutingResult route_separable(const RoutingProblem& problem, std::span<const CostPtr> costs,
                              const RoutingConfig& config, const RoutingOptions& options) {
  const std::size_t n_rows = problem.rows.size();
  const std::size_t n_flows = problem.flows;
  if (costs.size() != n_flows) throw std::invalid_argument("route_separable: cost count mismatch");
  if (problem.flow_rows.size() != n_flows) {
    throw std::logic_error("route_separable: problem not finalized");
  }
  for (const auto& c : costs) {
    if (!c || !c->strictly_convex()) {
      throw std::invalid_argument("route_separable: every cost must be strictly convex");
    }
  }

  std::vector<double> mu_prev(n_rows, config.mu_initial);
  if (options.warm_mu) {
    if (options.warm_mu->size() != n_rows) throw std::invalid_argument("warm_mu size mismatch");
    for (std::size_t l = 0; l < n_rows; ++l) {
      mu_prev[l] = std::max((*options.warm_mu)[l], config.mu_initial);
    }
  }

  std::vector<std::vector<const PathCost*>> row_costs(n_rows);
  std::vector<std::vector<double>> row_alpha(n_rows);
  std::vector<std::vector<double>> row_rates(n_rows);
  for (std::size_t l = 0; l < n_rows; ++l) {
    const auto& row = problem.rows[l];
    for (int f : row.flows) row_costs[l].push_back(costs[f].get());
    row_alpha[l].assign(row.flows.size(), 0.0);
    row_rates[l].assign(row.flows.size(), 0.0);
  }
  std::vector<double> free_rate(n_flows);
  for (std::size_t f = 0; f < n_flows; ++f) {
    free_rate[f] = unconstrained_rate(problem, *costs[f], f);
  }

  // Rows switched off after convergence because they are slack at the
  // reported rates (complementary slackness then forces mu = 0). A pruned
  // row that is violated after re-convergence is restored for good.
  std::vector<char> pruned(n_rows, 0);
  std::vector<int> restores(n_rows, 0);
  std::vector<char> keep(n_rows, 0);
  std::vector<double> mu(n_rows, 0.0);
  std::vector<std::size_t> row_evals(n_rows, 0);
  std::vector<std::size_t> active;

  RoutingResult result;
  result.r.assign(n_flows, 0.0);
  std::size_t j = 0;
  bool seeded = options.warm_mu != nullptr;

  auto assemble = [&]() {
    result.max_spread = 0.0;
    for (std::size_t f = 0; f < n_flows; ++f) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto [l, pos] : problem.flow_rows[f]) {
        if (mu_prev[l] > 0.0) {
          lo = std::min(lo, row_rates[l][pos]);
          hi = std::max(hi, row_rates[l][pos]);
        }
      }
      if (std::isfinite(lo)) {
        result.r[f] = lo;
        result.max_spread = std::max(result.max_spread, hi - lo);
      } else {
        result.r[f] = free_rate[f];
      }
    }
  };

  for (;;) {
    bool converged = false;
    while (j < config.max_iterations) {
      ++j;
      for (std::size_t l = 0; l < n_rows; ++l) {
        if (mu_prev[l] < kMuFloor && !keep[l]) mu_prev[l] = 0.0;
      }
      for (std::size_t f = 0; f < n_flows; ++f) {
        double total = 0.0;
        for (auto [l, pos] : problem.flow_rows[f]) {
          total += mu_prev[l] * problem.rows[l].coeff[pos];
        }
        const double k = static_cast<double>(problem.flow_rows[f].size());
        for (auto [l, pos] : problem.flow_rows[f]) {
          row_alpha[l][pos] =
              total > 0.0 ? mu_prev[l] * problem.rows[l].coeff[pos] / total : 1.0 / k;
        }
      }

      active.clear();
      for (std::size_t l = 0; l < n_rows; ++l) {
        if (mu_prev[l] > 0.0 && !problem.rows[l].flows.empty()) active.push_back(l);
      }
      std::fill(mu.begin(), mu.end(), 0.0);
      parallel_for(options.pool, active.size(), [&](std::size_t i) {
        const std::size_t l = active[i];
        LinkSolution s = solve_per_link(problem.rows[l], row_alpha[l], row_costs[l], config,
                                        seeded ? mu_prev[l] : 0.0);
        mu[l] = s.mu;
        row_rates[l] = std::move(s.r);
        row_evals[l] += s.evaluations;
      });
      seeded = true;

      const double residual = distance2(mu, mu_prev);
      const double mu_norm = norm2(mu);
      result.iterations = j;
      result.mu_residual = residual;
      if (options.trace) options.trace(j, mu_norm, residual);
      mu_prev.swap(mu);
      if (residual < config.mu_tolerance * (1.0 + mu_norm)) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NonConvergenceError("multi-path routing did not converge", result.iterations,
                                result.mu_residual);
    }
    assemble();

    bool restored = false;
    for (std::size_t l = 0; l < n_rows; ++l) {
      if ((pruned[l] || mu_prev[l] == 0.0) && row_load(problem.rows[l], result.r) >
                                                  problem.rows[l].capacity) {
        pruned[l] = 0;
        if (++restores[l] >= kMaxRestores) keep[l] = 1;
        mu_prev[l] = std::max(mu[l], config.mu_initial);
        restored = true;
      }
    }
    if (restored) continue;

    // Only multipliers already near zero are candidates; binding rows can look
    // slack at the reported rates while a spread remains.
    const double small = std::sqrt(config.mu_tolerance) * (1.0 + norm2(mu_prev));
    bool pruned_any = false;
    for (std::size_t l = 0; l < n_rows; ++l) {
      const auto& row = problem.rows[l];
      if (mu_prev[l] > 0.0 && mu_prev[l] < small && !keep[l] &&
          row_load(row, result.r) < row.capacity * (1.0 - 1e-9)) {
        pruned[l] = 1;
        mu_prev[l] = 0.0;
        pruned_any = true;
      }
    }
    if (!pruned_any) break;
  }

  result.mu = mu_prev;
  result.phi.assign(n_flows, 0.0);
  for (std::size_t f = 0; f < n_flows; ++f) {
    if (result.r[f] == 0.0) {
      double g = costs[f]->derivative(0.0);
      for (auto [l, pos] : problem.flow_rows[f]) g += result.mu[l] * problem.rows[l].coeff[pos];
      result.phi[f] = std::max(0.0, g);
    }
  }
  result.evaluations = std::accumulate(row_evals.begin(), row_evals.end(), std::size_t{0});
  return result;
}

// ---------------------------------------------------------------------------
// Majorize-minimize outer loop and the proximal variant

MajorizedResult route_majorized(const RoutingProblem& problem, const SurrogateBuilder& build,
                                std::vector<double> start, const RoutingConfig& config,
                                const RoutingOptions& options) {
  if (start.size() != problem.flows) throw std::invalid_argument("start size mismatch");
  MajorizedResult out;
  out.r = std::move(start);
  std::vector<double> warm;
  if (options.warm_mu) warm = *options.warm_mu;
  for (std::size_t m = 1; m <= config.max_surrogate_iterations; ++m) {
    const std::vector<CostPtr> costs = build(out.r);
    RoutingOptions inner = options;
    inner.warm_mu = warm.empty() ? nullptr : &warm;
    RoutingResult res = route_separable(problem, costs, config, inner);
    out.inner_iterations += res.iterations;
    out.movement = distance2(res.r, out.r);
    out.r = res.r;
    warm = res.mu;
    out.last = std::move(res);
    out.surrogate_iterations = m;
    if (out.movement < config.surrogate_tolerance) return out;
  }
  throw NonConvergenceError("surrogate iterations did not converge", out.surrogate_iterations,
                            out.movement);
}

std::vector<CostPtr> quadratic_surrogate(const JointCost& joint, std::span<const double> anchor) {
  const std::vector<double> g = joint.gradient(anchor);
  const double gamma = joint.lipschitz;
  const double share = joint.value(anchor) / static_cast<double>(anchor.size());
  std::vector<CostPtr> costs;
  costs.reserve(anchor.size());
  for (std::size_t f = 0; f < anchor.size(); ++f) {
    const double a = anchor[f];
    // g (r - a) + gamma/2 (r - a)^2 + share, expanded in powers of r.
    costs.push_back(std::make_shared<QuadraticCost>(gamma, g[f] - gamma * a,
                                                    share - g[f] * a + 0.5 * gamma * a * a));
  }
  return costs;
}

MajorizedResult route_nonseparable(const RoutingProblem& problem, const JointCost& joint,
                                   std::vector<double> start, const RoutingConfig& config,
                                   const RoutingOptions& options) {
  if (!(joint.lipschitz > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
  return route_majorized(
      problem, [&](std::span<const double> anchor) { return quadratic_surrogate(joint, anchor); },
      std::move(start), config, options);
}

MajorizedResult route_proximal(const RoutingProblem& problem, std::span<const CostPtr> costs,
                               std::vector<double> start, const RoutingConfig& config,
                               const RoutingOptions& options) {
  if (!(config.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (costs.size() != problem.flows) throw std::invalid_argument("cost count mismatch");
  return route_majorized(
      problem,
      [&](std::span<const double> anchor) {
        std::vector<CostPtr> prox;
        prox.reserve(anchor.size());
        for (std::size_t f = 0; f < anchor.size(); ++f) {
          prox.push_back(std::make_shared<ProximalCost>(costs[f], config.kappa, anchor[f]));
        }
        return prox;
      },
      std::move(start), config, options);
}

RoutingKkt routing_kkt(const RoutingProblem& problem, std::span<const CostPtr> costs,
                       std::span<const double> r, std::span<const double> mu) {
  RoutingKkt kkt;
  for (std::size_t f = 0; f < problem.flows; ++f) {
    double g = costs[f]->derivative(r[f]);
    for (auto [l, pos] : problem.flow_rows[f]) g += mu[l] * problem.rows[l].coeff[pos];
    // phi = max(0, g) is optimal at r = 0; elsewhere phi = 0.
    const double res = r[f] > 0.0 ? std::abs(g) : std::max(0.0, -g);
    kkt.stationarity = std::max(kkt.stationarity, res);
  }
  for (std::size_t l = 0; l < problem.rows.size(); ++l) {
    const auto& row = problem.rows[l];
    double load = 0.0;
    for (std::size_t i = 0; i < row.flows.size(); ++i) load += row.coeff[i] * r[row.flows[i]];
    const double scale = std::max(1.0, row.capacity);
    kkt.complementarity =
        std::max(kkt.complementarity, mu[l] * std::abs(row.capacity - load) / scale);
    kkt.primal = std::max(kkt.primal, std::max(0.0, load - row.capacity) / scale);
  }
  return kkt;
}

}  // namespace resv
