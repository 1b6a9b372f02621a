#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "resv/bcd.hpp"
#include "resv/errors.hpp"
#include "support.hpp"

using namespace resv;

namespace {

// One AP, one user, one direct path.
Topology single_path_toy(double budget, double capacity, const DemandDistribution& demand,
                         double theta, double snr) {
  const std::array<double, 1> budgets{budget};
  Topology t = testing::star(budgets, capacity);
  const std::array<int, 1> ap{1};
  const std::array<double, 1> s{snr};
  testing::add_user(t, ap, s, demand, theta);
  t.build_index();
  return t;
}

// Two APs, two users; user 0 is served by both APs, user 1 by AP 2 only.
Topology two_ap_toy(double theta = 0.5) {
  const std::array<double, 2> budgets{6.0, 8.0};
  Topology t = testing::star(budgets, 50.0);
  const std::array<int, 2> both{1, 2};
  const std::array<double, 2> s0{20.0, 8.0};
  testing::add_user(t, both, s0, DemandDistribution::lognormal(1.5, 0.5), theta);
  const std::array<int, 1> second{2};
  const std::array<double, 1> s1{12.0};
  testing::add_user(t, second, s1, DemandDistribution::lognormal(1.2, 0.6), theta);
  t.build_index();
  return t;
}

// The r-subproblem objective in minimization form for fixed t.
double r_objective(const Topology& t, const Models& m, std::span<const double> r,
                   std::span<const double> res) {
  double v = 0.0;
  for (const auto& u : t.users) {
    double total = 0.0;
    for (int p : u.paths) total += r[p];
    v -= expected_min(total, m.demand[u.id]);
  }
  for (const auto& p : t.paths)
    v += m.theta[p.user] * expected_outage(r[p.id], res[p.downlink], m.channels[p.downlink]);
  return v;
}

}  // namespace

TEST_SUITE("bcd") {
  TEST_CASE("objective of the zero reservation is zero") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    CHECK(objective(t, Reservation::zeros(t), m) == 0.0);
  }

  TEST_CASE("objective with zero weights is the expected traffic") {
    const Topology t = two_ap_toy(0.0);
    const Models m = Models::from_topology(t);
    Reservation res = Reservation::zeros(t);
    res.r = {1.0, 2.0, 3.0};
    res.t = {1.0, 1.0, 1.0};
    const double expected = expected_min(3.0, m.demand[0]) + expected_min(3.0, m.demand[1]);
    CHECK(objective(t, res, m) == doctest::Approx(expected).epsilon(1e-14));
    const ObjectiveTerms terms = objective_terms(t, res, m);
    CHECK(terms.weighted_outage == 0.0);
    CHECK(terms.expected_outage > 0.0);
  }

  TEST_CASE("objective of the one-path toy") {
    const Topology t = single_path_toy(10.0, 10.0, DemandDistribution::lognormal(0.0, 1.0), 0.5, 1.0);
    const Models m = Models::from_topology(t);
    Reservation res = Reservation::zeros(t);
    res.r = {1.0};
    res.t = {1.0};
    // expected_min(1) - 0.5 * expected_outage(1, 1) from the frozen oracles.
    CHECK(std::abs(objective(t, res, m) - (0.761578291865123372 - 0.5 * 0.331423389346057447)) < 1e-9);
  }

  TEST_CASE("objective of an infeasible reservation") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    Reservation res = Reservation::zeros(t);
    res.t = {7.0, 0.0, 0.0};
    CHECK_THROWS_AS(objective(t, res, m), StructuralError);
  }

  TEST_CASE("models") {
    const Topology t = two_ap_toy();
    const Models det = Models::deterministic_from_topology(t);
    CHECK(det.deterministic());
    CHECK(det.channels[0].spectral_efficiency() == doctest::Approx(std::log2(21.0)));
    Models mixed = Models::from_topology(t);
    CHECK_FALSE(mixed.deterministic());
    mixed.channels[0] = ChannelDistribution::deterministic(1.0);
    CHECK_THROWS_AS(mixed.validate(t), ConfigError);
    Models bad = Models::from_topology(t);
    bad.theta[0] = -1.0;
    CHECK_THROWS_AS(bad.validate(t), ConfigError);
  }

  TEST_CASE("r_problem rows") {
    const Topology t = two_ap_toy();
    CHECK(r_problem(t, Models::from_topology(t)).rows.size() == 2);
    // One budget row per AP in deterministic mode.
    CHECK(r_problem(t, Models::deterministic_from_topology(t)).rows.size() == 4);
    Models point = Models::from_topology(t);
    point.demand[1] = DemandDistribution::point_mass(2.0);
    CHECK(r_problem(t, point).rows.size() == 3);
  }

  TEST_CASE("demand_bregman") {
    const auto d = DemandDistribution::lognormal(1.0, 0.5);
    CHECK(demand_bregman(d, 2.0, 2.0) == 0.0);
    for (double r : {0.0, 1.0, 3.5, 8.0}) {
      const double direct = expected_min(2.0, d) - expected_min(r, d) - d.survival(2.0) * (2.0 - r);
      CHECK(demand_bregman(d, 2.0, r) == doctest::Approx(direct).epsilon(1e-8));
      CHECK(demand_bregman(d, 2.0, r) >= 0.0);
    }
  }

  TEST_CASE("the global surrogate majorizes the r-objective") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    const std::vector<double> res{2.0, 3.0, 4.0};
    const std::vector<double> anchor{1.0, 2.0, 1.5};
    const auto costs = r_surrogate(t, m, res, anchor, BcdConfig{});
    double at_anchor = 0.0;
    for (std::size_t p = 0; p < 3; ++p) at_anchor += costs[p]->value(anchor[p]);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int i = 0; i < 50; ++i) {
      const std::vector<double> r{u(rng), u(rng), u(rng)};
      double model = 0.0;
      for (std::size_t p = 0; p < 3; ++p) model += costs[p]->value(r[p]);
      CHECK(model - at_anchor >= r_objective(t, m, r, res) - r_objective(t, m, anchor, res) - 1e-9);
    }
  }

  TEST_CASE("r_step without resources reserves nothing") {
    const Topology t = single_path_toy(10.0, 10.0, DemandDistribution::lognormal(1.0, 0.5), 2.0, 10.0);
    const Models m = Models::from_topology(t);
    const std::vector<double> res{0.0}, start{3.0};
    const RStepResult rs = r_step(t, m, res, start, BcdConfig{});
    CHECK(rs.r[0] == doctest::Approx(0.0).epsilon(1e-6));
    // Grid check: any positive rate is worse when every unit is lost.
    for (double r = 0.01; r < 10.0; r += 0.01) {
      const std::vector<double> rr{r};
      CHECK(r_objective(t, m, rr, res) > r_objective(t, m, rs.r, res));
    }
  }

  TEST_CASE("r_step against a one-dimensional grid search") {
    const Topology t = single_path_toy(10.0, 100.0, DemandDistribution::lognormal(1.0, 0.5), 0.5, 10.0);
    const Models m = Models::from_topology(t);
    const std::vector<double> res{1.0}, start{0.0};
    const RStepResult rs = r_step(t, m, res, start, BcdConfig{});
    double best = std::numeric_limits<double>::infinity();
    for (double r = 0.0; r < 20.0; r += 1e-3) {
      const std::vector<double> rr{r};
      best = std::min(best, r_objective(t, m, rr, res));
    }
    CHECK(r_objective(t, m, rs.r, res) <= best + 1e-7);
  }

  TEST_CASE("r_step with zero weights saturates the demand") {
    const auto d = DemandDistribution::lognormal(0.0, 1.0);
    const Topology t = single_path_toy(10.0, 1e6, d, 0.0, 10.0);
    const Models m = Models::from_topology(t);
    const std::vector<double> res{1.0}, start{0.0};
    const RStepResult rs = r_step(t, m, res, start, BcdConfig{});
    CHECK(rs.r[0] >= d.upper_quantile(1e-4));
    CHECK(expected_min(rs.r[0], d) == doctest::Approx(d.mean()).epsilon(1e-9));
  }

  TEST_CASE("r_step with a binding link") {
    const Topology t = single_path_toy(10.0, 2.0, DemandDistribution::lognormal(1.5, 0.5), 0.1, 100.0);
    const Models m = Models::from_topology(t);
    const std::vector<double> res{5.0}, start{0.0};
    const RStepResult rs = r_step(t, m, res, start, BcdConfig{});
    CHECK(rs.r[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rs.mu[0] > 0.0);
  }

  TEST_CASE("bcd on deterministic channels against a budget-split search") {
    const std::array<double, 1> budgets{4.0};
    Topology t = testing::star(budgets, 100.0);
    const std::array<int, 1> ap{1};
    const std::array<double, 1> s0{3.0}, s1{7.0};
    testing::add_user(t, ap, s0, DemandDistribution::lognormal(1.0, 0.5), 0.5);
    testing::add_user(t, ap, s1, DemandDistribution::lognormal(1.2, 0.4), 0.5);
    t.build_index();
    const Models m = Models::deterministic_from_topology(t);
    const BcdResult res = bcd_solve(t, m, BcdConfig{});
    CHECK(check_feasible(t, res.reservation).feasible());
    // Rates 2 s and 3 (4 - s) for a split s of the budget.
    double best = -1.0;
    for (double s = 0.0; s <= 4.0; s += 1e-4)
      best = std::max(best, expected_min(2.0 * s, m.demand[0]) + expected_min(3.0 * (4.0 - s), m.demand[1]));
    const double value = objective(t, res.reservation, m);
    CHECK(std::abs(value - best) <= 1e-3 * best);
    for (std::size_t p = 0; p < 2; ++p) {
      const int w = t.paths[p].downlink;
      CHECK(res.reservation.r[p] <= m.channels[w].spectral_efficiency() * res.reservation.t[w] * (1 + 1e-9));
    }
  }

  TEST_CASE("bcd with zero budgets") {
    const Topology t = single_path_toy(0.0, 10.0, DemandDistribution::lognormal(1.0, 0.5), 2.0, 10.0);
    const BcdResult res = bcd_solve(t, Models::from_topology(t), BcdConfig{});
    CHECK(res.reservation.t[0] == 0.0);
    CHECK(res.reservation.r[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.converged);
  }

  TEST_CASE("bcd descends and stays feasible") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    const BcdResult res = bcd_solve(t, m, BcdConfig{});
    REQUIRE(res.iterations == res.trace.objective.size());
    for (std::size_t i = 1; i < res.trace.objective.size(); ++i)
      CHECK(res.trace.objective[i] >= res.trace.objective[i - 1] - 1e-8 * std::abs(res.trace.objective[i - 1]));
    CHECK(check_feasible(t, res.reservation, 1e-9).feasible());
    CHECK(objective(t, res.reservation, m) == doctest::Approx(res.trace.objective.back()));
    if (res.converged) {
      const double dr = res.trace.r_movement.back(), dt = res.trace.t_movement.back();
      CHECK(dr * dr + dt * dt < BcdConfig{}.tolerance);
      const BlockKkt kkt = bcd_kkt(t, m, BcdConfig{}, res);
      CHECK(kkt.r.primal <= 1e-9);
      CHECK(kkt.t < 1e-3);
    }
  }

  TEST_CASE("bcd iteration cap returns the best iterate") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    BcdConfig cfg;
    cfg.max_iterations = 2;
    cfg.tolerance = 1e-30;
    const BcdResult res = bcd_solve(t, m, cfg);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 2);
    CHECK(objective(t, res.reservation, m) ==
          doctest::Approx(std::max(res.trace.objective[0], res.trace.objective[1])));
  }

  TEST_CASE("bcd does not depend on the worker count") {
    const Topology t = two_ap_toy();
    const Models m = Models::from_topology(t);
    WorkerPool pool(3);
    const BcdResult a = bcd_solve(t, m, BcdConfig{});
    const BcdResult b = bcd_solve(t, m, BcdConfig{}, &pool);
    CHECK(a.reservation.r == b.reservation.r);
    CHECK(a.reservation.t == b.reservation.t);
    CHECK(a.trace.objective == b.trace.objective);
  }

  TEST_CASE("shared-downlink outage") {
    const std::array<double, 1> budgets{5.0};
    Topology t = testing::star(budgets, 50.0);
    t.nodes.push_back(Node{2, NodeKind::router, 0.0, 50.0, 0.0});
    t.links.push_back(Link{1, 0, 2, 50.0});
    t.links.push_back(Link{2, 2, 1, 50.0});
    const std::array<int, 1> ap{1};
    const std::array<double, 1> s{10.0};
    testing::add_user(t, ap, s, DemandDistribution::lognormal(1.5, 0.5), 0.5);
    // Second path over the router to the same downlink.
    Path p;
    p.id = 1;
    p.user = 0;
    p.links = {1, 2};
    p.downlink = 0;
    t.paths.push_back(p);
    t.build_index();
    const Models m = Models::from_topology(t);
    Reservation res = Reservation::zeros(t);
    res.r = {1.0, 2.0};
    res.t = {2.0};
    const ObjectiveTerms shared = objective_terms(t, res, m, true);
    CHECK(shared.expected_outage == doctest::Approx(expected_outage(3.0, 2.0, m.channels[0])));
    BcdConfig cfg;
    cfg.shared_downlink = true;
    const BcdResult out = bcd_solve(t, m, cfg);
    CHECK(check_feasible(t, out.reservation).feasible());
    for (std::size_t i = 1; i < out.trace.objective.size(); ++i)
      CHECK(out.trace.objective[i] >= out.trace.objective[i - 1] - 1e-8 * std::abs(out.trace.objective[i - 1]));
  }
}
