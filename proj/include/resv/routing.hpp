#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "resv/network.hpp"
#include "resv/parallel.hpp"

namespace resv {

/// Scalar convex cost psi(r) of one flow on r >= 0.
class PathCost {
 public:
  virtual ~PathCost() = default;
  virtual double value(double r) const = 0;
  virtual double derivative(double r) const = 0;
  virtual bool strictly_convex() const = 0;
  /// The r in [lo, hi] with derivative(r) = -slope, given that
  /// derivative(lo) + slope < 0 < derivative(hi) + slope. The default uses a
  /// bracketing root finder; closed forms may override.
  virtual double solve_derivative(double slope, double lo, double hi) const;
};

using CostPtr = std::shared_ptr<const PathCost>;

/// 0.5 * curvature * r^2 + linear * r + constant.
class QuadraticCost final : public PathCost {
 public:
  QuadraticCost(double curvature, double linear, double constant = 0.0);
  double value(double r) const override;
  double derivative(double r) const override;
  bool strictly_convex() const override { return curvature_ > 0.0; }
  double solve_derivative(double slope, double lo, double hi) const override;

 private:
  double curvature_;
  double linear_;
  double constant_;
};

/// slope * r.
class LinearCost final : public PathCost {
 public:
  explicit LinearCost(double slope) : slope_(slope) {}
  double value(double r) const override { return slope_ * r; }
  double derivative(double) const override { return slope_; }
  bool strictly_convex() const override { return false; }

 private:
  double slope_;
};

/// Cost given by callables; strict convexity is asserted by the caller.
class FunctionCost final : public PathCost {
 public:
  FunctionCost(std::function<double(double)> value, std::function<double(double)> derivative,
               bool strictly_convex);
  double value(double r) const override { return value_(r); }
  double derivative(double r) const override { return derivative_(r); }
  bool strictly_convex() const override { return strict_; }

 private:
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  bool strict_;
};

/// base(r) + kappa/2 (r - anchor)^2.
class ProximalCost final : public PathCost {
 public:
  ProximalCost(CostPtr base, double kappa, double anchor);
  double value(double r) const override;
  double derivative(double r) const override;
  bool strictly_convex() const override { return true; }

 private:
  CostPtr base_;
  double kappa_;
  double anchor_;
};

/// One packing constraint sum_f coeff_f r_f <= capacity. Wired links have
/// unit coefficients; other rows (radio budgets, demand caps) reuse the same
/// machinery with general positive weights.
struct ConstraintRow {
  double capacity = 0.0;
  std::vector<int> flows;
  std::vector<double> coeff;
};

struct RoutingProblem {
  std::size_t flows = 0;
  std::vector<ConstraintRow> rows;

  /// Incidences of each flow as (row, position within the row).
  std::vector<std::vector<std::pair<int, int>>> flow_rows;

  /// One unit-coefficient row per link, one flow per path.
  static RoutingProblem from_topology(const Topology& topology);

  void add_row(ConstraintRow row);
  /// Builds flow_rows; every flow must lie on at least one row.
  void finalize();
};

struct RoutingConfig {
  double mu_initial = 1e-3;
  // Stop when ||mu^j - mu^{j-1}||_2 < mu_tolerance * (1 + ||mu^j||_2).
  double mu_tolerance = 1e-6;
  std::size_t max_iterations = 20000;
  // Bits of precision for the bracketing root finders (per-flow and mu).
  int root_bits = 48;
  std::size_t max_bracket_doublings = 64;
  // Algorithm-3 style outer loops.
  double surrogate_tolerance = 1e-4;
  std::size_t max_surrogate_iterations = 500;
  double kappa = 1.0;
};

struct LinkSolution {
  double mu = 0.0;
  std::vector<double> r;    // by position in the row
  std::vector<double> phi;  // nonnegativity multipliers, same indexing
  std::size_t evaluations = 0;
};

/// Weighted single-row problem: minimize sum_f alpha_f psi_f(r_f) subject to
/// sum_f a_f r_f <= C, r >= 0. Nested bisection: an outer search on mu and a
/// per-flow root of alpha psi' + mu a = 0. mu_hint > 0 seeds the bracket.
LinkSolution solve_per_link(const ConstraintRow& row, std::span<const double> alpha,
                            std::span<const PathCost* const> costs, const RoutingConfig& config,
                            double mu_hint = 0.0);

/// alpha_l proportional to mu_l * coeff_l over the given incidences; uniform
/// when all products vanish. Throws StructuralError on an empty path.
std::vector<double> compute_alpha(std::span<const double> mu, std::span<const double> coeff);

struct RoutingResult {
  std::vector<double> r;
  std::vector<double> mu;    // per row
  std::vector<double> phi;   // per flow
  std::size_t iterations = 0;
  double mu_residual = 0.0;  // last ||mu^j - mu^{j-1}||_2
  double max_spread = 0.0;   // largest rate spread across a flow's positive-mu rows
  std::size_t evaluations = 0;
};

using RoutingTrace = std::function<void(std::size_t iteration, double mu_norm, double residual)>;

struct RoutingOptions {
  WorkerPool* pool = nullptr;
  const std::vector<double>* warm_mu = nullptr;  // per-row starting multipliers
  RoutingTrace trace;
};

/// The alpha-decomposed dual iteration for separable strictly convex costs.
/// The reported rate of a flow is the smallest of its latest per-row rates
/// over rows with positive multipliers, which keeps every row feasible.
RoutingResult route_separable(const RoutingProblem& problem, std::span<const CostPtr> costs,
                              const RoutingConfig& config, const RoutingOptions& options = {});

/// Builds per-flow convex costs around the current iterate.
using SurrogateBuilder = std::function<std::vector<CostPtr>(std::span<const double> anchor)>;

struct MajorizedResult {
  RoutingResult last;
  std::vector<double> r;
  std::size_t surrogate_iterations = 0;
  std::size_t inner_iterations = 0;
  double movement = 0.0;
};

/// Repeats: costs = build(r^m); r^{m+1} = route_separable(costs) until
/// ||r^{m+1} - r^m||_2 < surrogate_tolerance. Multipliers warm-start each solve.
MajorizedResult route_majorized(const RoutingProblem& problem, const SurrogateBuilder& build,
                                std::vector<double> start, const RoutingConfig& config,
                                const RoutingOptions& options = {});

/// Smooth convex joint cost with a gradient Lipschitz constant.
struct JointCost {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  double lipschitz = 1.0;
};

/// Flow costs of the separable quadratic upper bound of `joint` at `anchor`;
/// their sum equals the bound, so it matches joint.value at the anchor.
std::vector<CostPtr> quadratic_surrogate(const JointCost& joint, std::span<const double> anchor);

MajorizedResult route_nonseparable(const RoutingProblem& problem, const JointCost& joint,
                                   std::vector<double> start, const RoutingConfig& config,
                                   const RoutingOptions& options = {});

/// Convex costs that need not be strictly convex, made strictly convex by a
/// kappa-proximal term around the previous iterate.
MajorizedResult route_proximal(const RoutingProblem& problem, std::span<const CostPtr> costs,
                               std::vector<double> start, const RoutingConfig& config,
                               const RoutingOptions& options = {});

struct RoutingKkt {
  double stationarity = 0.0;     // max |psi' + sum mu a - phi|
  double complementarity = 0.0;  // max mu_l |C_l - load_l| / max(1, C_l)
  double primal = 0.0;           // max positive (load_l - C_l) / max(1, C_l)
};

/// KKT residuals of the full problem at (r, mu), with phi chosen optimally.
RoutingKkt routing_kkt(const RoutingProblem& problem, std::span<const CostPtr> costs,
                       std::span<const double> r, std::span<const double> mu);

}  // namespace resv
