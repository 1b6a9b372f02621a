#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "resv/ran.hpp"
#include "support.hpp"

using namespace resv;

namespace {

// Three APs (budgets 4, 3, 5) with two single-path users each.
struct RanToy {
  Topology topology;
  RanInput input;
};

RanToy ran_toy() {
  const std::array<double, 3> budgets{4.0, 3.0, 5.0};
  RanToy toy;
  toy.topology = testing::star(budgets, 100.0);
  const std::array<double, 6> rates{2.0, 5.0, 1.0, 3.0, 4.0, 4.0};
  const std::array<double, 6> snrs{10.0, 3.0, 30.0, 1.0, 5.0, 5.0};
  for (int i = 0; i < 6; ++i) {
    const std::array<int, 1> ap{1 + i / 2};
    const std::array<double, 1> snr{snrs[i]};
    testing::add_user(toy.topology, ap, snr, DemandDistribution::lognormal(1.0, 0.5), 0.5);
  }
  toy.topology.build_index();
  for (int i = 0; i < 6; ++i) {
    toy.input.rates.push_back({rates[i]});
    toy.input.theta.push_back(0.5);
    toy.input.channels.push_back(ChannelDistribution::rayleigh(snrs[i]));
  }
  return toy;
}

std::vector<double> uniform_start(const Topology& t) {
  std::vector<double> s(t.downlinks.size());
  for (int b : t.access_points())
    for (int w : t.downlinks_at(b)) s[w] = t.nodes[b].budget / double(t.downlinks_at(b).size());
  return s;
}

}  // namespace

TEST_SUITE("ran") {
  TEST_CASE("outage_t_derivative examples") {
    const auto ch = ChannelDistribution::rayleigh(4.0);
    CHECK(outage_t_derivative(0.0, 2.0, ch) == 0.0);
    // Oracle: 30-digit numerical derivative of the 30-digit outage integral.
    CHECK(std::abs(outage_t_derivative(2.0, 1.5, ch) + 0.229729043406732073) < 1e-10);
    CHECK(outage_t_derivative(2.0, 1.5, ChannelDistribution::deterministic(2.0)) == 0.0);
    CHECK_THROWS_AS(outage_t_derivative(1.0, 0.0, ch), std::domain_error);
    CHECK_THROWS_AS(outage_t_derivative(-1.0, 1.0, ch), std::domain_error);
  }

  TEST_CASE("outage_t_derivative is nonpositive and matches finite differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double r = 25.0 * unit(rng), t = 0.2 + 10.0 * unit(rng);
      const auto ch = ChannelDistribution::rayleigh(std::pow(10.0, 5.0 * unit(rng) - 1.0));
      const double d = outage_t_derivative(r, t, ch);
      CHECK(d <= 0.0);
      const double h = 1e-4 * t;
      const double fd = (expected_outage(r, t + h, ch) - expected_outage(r, t - h, ch)) / (2.0 * h);
      CHECK(std::abs(d - fd) < 1e-5);
      const double quad = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double v) { return ch.cdf_dt(v, t); }, 0.0, r, 15, 1e-13);
      CHECK(std::abs(d - quad) < 1e-8);
    }
  }

  TEST_CASE("zero rates need no resource") {
    const auto ch = ChannelDistribution::rayleigh(5.0);
    std::vector<ApDownlink> dls(2);
    for (auto& d : dls) {
      d.rates = {0.0};
      d.theta = 0.5;
      d.anchor = 0.0;
      d.channel = &ch;
    }
    const ApSolution s = solve_per_ap(dls, 4.0, RanConfig{});
    CHECK(s.t[0] == 0.0);
    CHECK(s.t[1] == 0.0);
    CHECK(s.lambda == 0.0);

    dls[0].anchor = 1.0;
    dls[1].anchor = 2.0;
    const ApSolution kept = solve_per_ap(dls, 4.0, RanConfig{});
    CHECK(kept.t[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(kept.t[1] == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("single downlink with an ample budget sits at the surrogate root") {
    const auto ch = ChannelDistribution::rayleigh(2.0);
    ApDownlink d;
    d.rates = {3.0};
    d.theta = 0.5;
    d.anchor = 1.0;
    d.zeta = 0.2;
    d.channel = &ch;
    const std::array<ApDownlink, 1> dls{d};
    const ApSolution s = solve_per_ap(dls, 1e6, RanConfig{});
    CHECK(s.lambda == 0.0);
    // Bisection on theta D(t) + theta zeta (t - anchor).
    auto h = [&](double t) { return 0.5 * outage_t_derivative(3.0, t, ch) + 0.5 * 0.2 * (t - 1.0); };
    double lo = 1e-6, hi = 1.0;
    while (h(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) < 0.0 ? lo : hi) = mid;
    }
    CHECK(s.t[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-8));
  }

  TEST_CASE("identical downlinks split a binding budget evenly") {
    const auto ch = ChannelDistribution::rayleigh(3.0);
    std::vector<ApDownlink> dls(2);
    for (auto& d : dls) {
      d.rates = {6.0};
      d.theta = 0.5;
      d.anchor = 1.0;
      d.channel = &ch;
    }
    const ApSolution s = solve_per_ap(dls, 2.0, RanConfig{});
    CHECK(s.t[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.t[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.lambda > 0.0);
    CHECK(s.t[0] + s.t[1] <= 2.0);
  }

  TEST_CASE("zero budget gives zero resources") {
    const auto ch = ChannelDistribution::rayleigh(3.0);
    ApDownlink d;
    d.rates = {2.0};
    d.theta = 0.5;
    d.channel = &ch;
    const std::array<ApDownlink, 1> dls{d};
    const ApSolution s = solve_per_ap(dls, 0.0, RanConfig{});
    CHECK(s.t[0] == 0.0);
    CHECK(s.beta[0] >= 0.0);
  }

  TEST_CASE("proximal coefficient is at least the floor") {
    const auto ch = ChannelDistribution::rayleigh(3.0);
    const std::vector<double> rates{4.0};
    RanConfig cfg;
    CHECK(proximal_coefficient(rates, ch, 10.0, cfg) >= cfg.zeta_min);
    CHECK(proximal_coefficient(rates, ChannelDistribution::deterministic(2.0), 10.0, cfg) == cfg.zeta_min);
  }

  TEST_CASE("ran_bsum against a grid search") {
    const RanToy toy = ran_toy();
    const RanResult res = ran_bsum(toy.topology, toy.input, uniform_start(toy.topology), RanConfig{});
    for (std::size_t j = 1; j < res.objective.size(); ++j)
      CHECK(res.objective[j] <= res.objective[j - 1] + 1e-12);

    double best = 0.0;
    for (int b : toy.topology.access_points()) {
      const auto& ids = toy.topology.downlinks_at(b);
      const double cap = toy.topology.nodes[b].budget;
      double ap_best = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= static_cast<int>(std::round(cap / 0.01)); ++k) {
        const double t0 = 0.01 * k, t1 = cap - t0;
        double v = 0.0;
        const std::array<double, 2> ts{t0, t1};
        for (int i = 0; i < 2; ++i)
          v += 0.5 * expected_outage(toy.input.rates[ids[i]][0], ts[i], toy.input.channels[ids[i]]);
        ap_best = std::min(ap_best, v);
      }
      best += ap_best;
    }
    const double value = ran_objective(toy.input, res.t);
    CHECK(value <= best + 1e-3);
    CHECK(value >= best - 1e-3);
    CHECK(ran_stationarity(toy.topology, toy.input, res.t, res.lambda) < 1e-5);
  }

  TEST_CASE("ran_bsum from its own solution takes one iteration") {
    const RanToy toy = ran_toy();
    const RanResult first = ran_bsum(toy.topology, toy.input, uniform_start(toy.topology), RanConfig{});
    const RanResult again = ran_bsum(toy.topology, toy.input, first.t, RanConfig{});
    CHECK(again.iterations == 1);
  }

  TEST_CASE("ran_bsum is independent of the worker count") {
    const RanToy toy = ran_toy();
    WorkerPool pool(3);
    const RanResult a = ran_bsum(toy.topology, toy.input, uniform_start(toy.topology), RanConfig{});
    const RanResult b = ran_bsum(toy.topology, toy.input, uniform_start(toy.topology), RanConfig{}, &pool);
    CHECK(a.t == b.t);
    CHECK(a.lambda == b.lambda);
  }

  TEST_CASE("deterministic channels project the start") {
    RanToy toy = ran_toy();
    for (auto& c : toy.input.channels) c = ChannelDistribution::deterministic(2.0);
    const std::vector<double> start = uniform_start(toy.topology);
    const RanResult res = ran_bsum(toy.topology, toy.input, start, RanConfig{});
    // AP 1 needs at least (1, 2.5); lifting the second entry of the start
    // (2, 2) costs 0.5 of budget, taken from the first.
    CHECK(res.t[0] == doctest::Approx(1.5));
    CHECK(res.t[1] == doctest::Approx(2.5));
    // AP 2 start (1.5, 1.5) already covers 0.5 and 1.5.
    CHECK(res.t[2] == doctest::Approx(1.5));
    CHECK(res.t[3] == doctest::Approx(1.5));
    CHECK(res.iterations <= 2);
  }
}
