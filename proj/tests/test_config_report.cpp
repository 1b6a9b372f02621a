#include <doctest.h>

#include <array>
#include <sstream>
#include <string>

#include "resv/config.hpp"
#include "resv/errors.hpp"
#include "resv/report.hpp"
#include "support.hpp"

using namespace resv;

namespace {

Topology toy(double theta) {
  const std::array<double, 1> budgets{8.0};
  Topology t = testing::star(budgets, 20.0);
  const std::array<int, 1> ap{1};
  const std::array<double, 1> s{10.0};
  testing::add_user(t, ap, s, DemandDistribution::lognormal(1.0, 0.5), theta);
  t.build_index();
  return t;
}

std::size_t lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("empty document gives the defaults") {
    const RunConfig c = parse_run_config(Json::parse(R"({"schema": "resv.config/1"})"));
    CHECK(c.seed == 0);
    CHECK_FALSE(c.model.deterministic);
    CHECK_FALSE(c.model.theta.has_value());
    CHECK(c.solver.tolerance == 1e-4);
    CHECK(c.solver.max_iterations == 50);
    CHECK(c.evaluation.scenarios == 100);
    CHECK(c.sweep.algorithms.size() == 2);
  }

  TEST_CASE("full document") {
    const Json doc = Json::parse(R"({
      "schema": "resv.config/1", "seed": 7,
      "model": {"channel": "deterministic", "theta": 0.25, "shared_downlink": true, "kde_beta": 2},
      "solver": {"bcd_tolerance": 1e-5, "bcd_max_iterations": 9, "mu_tolerance": 1e-7},
      "sweep": {"ap_budgets": [10, 20], "eta_means": [1.5], "algorithms": ["bcd"]},
      "evaluation": {"scenarios": 12, "demand_mean_shift": 0.5, "algorithms": ["average-based"]},
      "output_dir": "out"})");
    const RunConfig c = parse_run_config(doc);
    CHECK(c.seed == 7);
    CHECK(c.model.deterministic);
    CHECK(*c.model.theta == 0.25);
    CHECK(c.solver.shared_downlink);
    CHECK(c.kde_beta == 2.0);
    CHECK(c.solver.tolerance == 1e-5);
    CHECK(c.solver.max_iterations == 9);
    CHECK(c.solver.routing.mu_tolerance == 1e-7);
    CHECK(c.sweep.ap_budgets == std::vector<double>{10.0, 20.0});
    CHECK(c.sweep.algorithms == std::vector<Algorithm>{Algorithm::bcd});
    CHECK(c.evaluation.scenarios == 12);
    CHECK(c.evaluation.demand_mean_shift == 0.5);
    CHECK(c.output_dir == "out");
    const RunConfig back = parse_run_config(run_config_to_json(c));
    CHECK(run_config_to_json(back).dump() == run_config_to_json(c).dump());
  }

  TEST_CASE("invalid documents") {
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "colour": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/2"})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::object()), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "solver": {"bcd_tolerance": -1}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "solver": {"bcd_max_iterations": 0}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "model": {"channel": "awgn"}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "model": {"theta": -0.5}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "sweep": {"algorithms": ["greedy"]}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse(R"({"schema": "resv.config/1", "evaluation": {"scenarios": "many"}})")), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json::parse("[1, 2]")), ConfigError);
  }
}

TEST_SUITE("report") {
  TEST_CASE("format_number round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(2.0) == "2");
  }

  TEST_CASE("solve report layout") {
    const Topology t = toy(0.5);
    const Models m = Models::from_topology(t);
    const BcdResult res = bcd_solve(t, m, BcdConfig{});
    const Json doc = solve_report(t, m, Algorithm::bcd, res);
    CHECK(doc["schema"] == kReportSchema);
    CHECK(doc["algorithm"] == "bcd");
    CHECK(doc["objective"].contains("weighted_outage"));
    CHECK(doc["reservation"]["paths"].size() == 1);
    CHECK(doc["trace"]["objective"].size() == res.iterations);
    CHECK_FALSE(doc["trace"].contains("wall_seconds"));
    CHECK(lines(trace_csv(res.trace)) == res.iterations + 1);
  }

  TEST_CASE("zero weights drop the outage terms from the report") {
    const Topology t = toy(0.0);
    const Models m = Models::from_topology(t);
    const BcdResult res = bcd_solve(t, m, BcdConfig{});
    const Json doc = solve_report(t, m, Algorithm::bcd, res);
    CHECK_FALSE(doc["objective"].contains("expected_outage"));
    CHECK_FALSE(doc["objective"].contains("weighted_outage"));
    CHECK(doc["objective"]["value"] == doc["objective"]["expected_traffic"]);
  }

  TEST_CASE("sweep, evaluation and density tables") {
    SweepRow row;
    row.ap_budget = 10.0;
    row.eta_mean = std::nan("");
    const std::vector<SweepRow> rows{row, row};
    const std::string csv = sweep_csv(rows);
    CHECK(lines(csv) == 3);
    CHECK(csv.find("bcd,10,nan,") != std::string::npos);

    EvaluationReport rep;
    rep.scenarios = 2;
    AlgorithmEvaluation ev;
    ev.ratios = {0.5, 1.0};
    ev.cdf = {{0.5, 0.5}, {1.0, 1.0}};
    ev.median = 0.75;
    rep.algorithms.push_back(ev);
    CHECK(evaluation_csv(rep) == "algorithm,scenario,ratio\nbcd,0,0.5\nbcd,1,1\n");
    const Json j = evaluation_json(rep);
    CHECK(j["schema"] == kEvaluationSchema);
    CHECK(j["delivery_rule"] == kDeliveryRule);

    RecursiveKde kde(0.0, 1.0, 5);
    kde.update(0.5);
    CHECK(lines(density_csv(kde)) == 6);
  }
}
