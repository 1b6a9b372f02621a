#pragma once

// Shared builders and independent reference computations for the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "resv/network.hpp"
#include "resv/routing.hpp"

namespace resv::testing {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// E[min(r, d)] for d ~ lognormal(eta, sigma) in closed form.
inline double lognormal_expected_min(double r, double eta, double sigma) {
  if (r <= 0.0) return 0.0;
  const double z = (std::log(r) - eta) / sigma;
  return std::exp(eta + 0.5 * sigma * sigma) * normal_cdf(z - sigma) + r * normal_cdf(-z);
}

inline double lognormal_pdf(double y, double eta, double sigma) {
  if (y <= 0.0) return 0.0;
  const double z = (std::log(y) - eta) / sigma;
  return std::exp(-0.5 * z * z) / (y * sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Direct recomputation of the recursive estimator from all observations.
inline double batch_kde(std::span<const double> xs, double x, double beta) {
  const double gamma = 1.0 / (2.0 * beta + 1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double h = std::pow(static_cast<double>(k + 1), -gamma);
    const double u = (xs[k] - x) / h;
    sum += std::exp(-0.5 * u * u) / (std::sqrt(2.0 * std::numbers::pi) * h);
  }
  return sum / static_cast<double>(xs.size());
}

/// Sum of 0.5 a_f (r_f - b_f)^2.
inline double quadratic_value(std::span<const double> a, std::span<const double> b,
                              std::span<const double> r) {
  double v = 0.0;
  for (std::size_t f = 0; f < r.size(); ++f) v += 0.5 * a[f] * (r[f] - b[f]) * (r[f] - b[f]);
  return v;
}

struct ReferenceSolution {
  std::vector<double> r;
  std::vector<double> mu;
  double value = 0.0;
};

/// Accelerated projected gradient ascent on the dual of
///   min sum 0.5 a_f (r_f - b_f)^2  s.t.  rows, r >= 0,
/// where r(mu) = max(0, b - (A^T mu) / a) in closed form.
inline ReferenceSolution projected_gradient_reference(const RoutingProblem& problem,
                                                      std::span<const double> a,
                                                      std::span<const double> b,
                                                      std::size_t iterations = 200000) {
  const std::size_t m = problem.rows.size();
  const std::size_t n = problem.flows;
  auto primal = [&](std::span<const double> mu) {
    std::vector<double> price(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = problem.rows[i];
      for (std::size_t j = 0; j < row.flows.size(); ++j)
        price[row.flows[j]] += mu[i] * row.coeff[j];
    }
    std::vector<double> r(n);
    for (std::size_t f = 0; f < n; ++f) r[f] = std::max(0.0, b[f] - price[f] / a[f]);
    return r;
  };
  // Lipschitz bound of the dual gradient: ||A||_F^2 / min a.
  double frob = 0.0;
  for (const auto& row : problem.rows)
    for (double c : row.coeff) frob += c * c;
  const double step = *std::min_element(a.begin(), a.end()) / frob;

  std::vector<double> mu(m, 0.0), prev(m, 0.0), y(m, 0.0);
  double momentum = 1.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    const std::vector<double> r = primal(y);
    prev = mu;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = problem.rows[i];
      double load = 0.0;
      for (std::size_t j = 0; j < row.flows.size(); ++j) load += row.coeff[j] * r[row.flows[j]];
      mu[i] = std::max(0.0, y[i] + step * (load - row.capacity));
    }
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    for (std::size_t i = 0; i < m; ++i) y[i] = mu[i] + (momentum - 1.0) / next * (mu[i] - prev[i]);
    momentum = next;
  }
  ReferenceSolution out;
  out.mu = mu;
  out.r = primal(mu);
  out.value = quadratic_value(a, b, out.r);
  return out;
}

/// Largest relative row overload of r.
inline double max_overload(const RoutingProblem& problem, std::span<const double> r) {
  double worst = 0.0;
  for (const auto& row : problem.rows) {
    double load = 0.0;
    for (std::size_t j = 0; j < row.flows.size(); ++j) load += row.coeff[j] * r[row.flows[j]];
    worst = std::max(worst, (load - row.capacity) / std::max(1.0, row.capacity));
  }
  return worst;
}

struct RandomQuadratic {
  RoutingProblem problem;
  std::vector<double> a;
  std::vector<double> b;
};

/// Random instance with up to `max_links` unit rows and `max_paths` flows, each
/// flow on 1 to 4 distinct rows.
inline RandomQuadratic random_quadratic(std::mt19937_64& rng, std::size_t max_links,
                                        std::size_t max_paths) {
  std::uniform_int_distribution<std::size_t> nl(2, max_links), np(2, max_paths);
  const std::size_t links = nl(rng), paths = np(rng);
  std::uniform_real_distribution<double> cap(0.5, 3.0), curv(0.5, 2.0), target(0.5, 4.0);
  RandomQuadratic q;
  q.problem.flows = paths;
  q.problem.rows.resize(links);
  for (auto& row : q.problem.rows) row.capacity = cap(rng);
  for (std::size_t f = 0; f < paths; ++f) {
    std::vector<int> ids(links);
    for (std::size_t i = 0; i < links; ++i) ids[i] = static_cast<int>(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t hops = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(4, links))(rng);
    for (std::size_t h = 0; h < hops; ++h) {
      q.problem.rows[ids[h]].flows.push_back(static_cast<int>(f));
      q.problem.rows[ids[h]].coeff.push_back(1.0);
    }
    q.a.push_back(curv(rng));
    q.b.push_back(target(rng));
  }
  // Rows no flow uses are dropped.
  std::erase_if(q.problem.rows, [](const ConstraintRow& row) { return row.flows.empty(); });
  q.problem.finalize();
  return q;
}

inline std::vector<CostPtr> quadratic_costs(std::span<const double> a, std::span<const double> b) {
  std::vector<CostPtr> costs;
  for (std::size_t f = 0; f < a.size(); ++f)
    costs.push_back(std::make_shared<QuadraticCost>(a[f], -a[f] * b[f], 0.5 * a[f] * b[f] * b[f]));
  return costs;
}

/// Data center 0, one AP per entry of `budgets` (node ids 1..), each with a
/// direct link of capacity `link_capacity`. No users yet.
inline Topology star(std::span<const double> budgets, double link_capacity) {
  Topology t;
  t.nodes.push_back(Node{0, NodeKind::data_center, 0.0, 0.0, 0.0});
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    t.nodes.push_back(Node{id, NodeKind::access_point, 100.0 * id, 0.0, budgets[i]});
    t.links.push_back(Link{static_cast<int>(i), 0, id, link_capacity});
  }
  return t;
}

/// Adds a user served by the given APs (node ids), one downlink and one
/// direct path each.
inline int add_user(Topology& t, std::span<const int> aps, std::span<const double> snrs,
                    const DemandDistribution& demand, double theta) {
  const int user = static_cast<int>(t.users.size());
  User u;
  u.id = user;
  u.theta = theta;
  u.demand = demand;
  t.users.push_back(u);
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const int w = static_cast<int>(t.downlinks.size());
    t.downlinks.push_back(Downlink{w, user, aps[i], snrs[i]});
    Path p;
    p.id = static_cast<int>(t.paths.size());
    p.user = user;
    p.links = {aps[i] - 1};
    p.downlink = w;
    t.paths.push_back(p);
  }
  return user;
}

}  // namespace resv::testing
