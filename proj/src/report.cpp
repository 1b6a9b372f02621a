#include "resv/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace resv {

namespace {

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

Json terms_json(const ObjectiveTerms& terms, bool with_outage) {
  Json j{{"value", terms.value()}, {"expected_traffic", terms.expected_traffic}};
  if (with_outage) {
    j["expected_outage"] = terms.expected_outage;
    j["weighted_outage"] = terms.weighted_outage;
  }
  return j;
}

bool any_theta(const Models& models) {
  for (double t : models.theta) {
    if (t > 0.0) return true;
  }
  return false;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Json solve_report(const Topology& topology, const Models& models, Algorithm algorithm,
                  const BcdResult& result, bool shared_downlink) {
  const Reservation& res = result.reservation;
  Json doc;
  doc["schema"] = kReportSchema;
  doc["algorithm"] = to_string(algorithm);
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["shared_downlink"] = shared_downlink;
  doc["objective"] =
      terms_json(objective_terms(topology, res, models, shared_downlink), any_theta(models));
  doc["totals"] = {{"reserved_rate", sum(res.r)}, {"reserved_bandwidth", sum(res.t)}};

  Json paths = Json::array();
  for (const auto& p : topology.paths) {
    paths.push_back({{"id", p.id}, {"user", p.user}, {"downlink", p.downlink}, {"rate", res.r[p.id]}});
  }
  Json downlinks = Json::array();
  for (const auto& w : topology.downlinks) {
    downlinks.push_back({{"id", w.id}, {"user", w.user}, {"ap", w.ap}, {"resource", res.t[w.id]}});
  }
  doc["reservation"] = {{"paths", std::move(paths)}, {"downlinks", std::move(downlinks)}};

  const BcdTrace& t = result.trace;
  doc["trace"] = {{"objective", t.objective},
                  {"expected_traffic", t.expected_traffic},
                  {"expected_outage", t.expected_outage},
                  {"r_movement", t.r_movement},
                  {"t_movement", t.t_movement},
                  {"surrogate_iterations", t.surrogate_iterations},
                  {"routing_iterations", t.routing_iterations},
                  {"ran_iterations", t.ran_iterations}};
  return doc;
}

std::string trace_csv(const BcdTrace& t) {
  std::ostringstream out;
  out << "iteration,objective,expected_traffic,expected_outage,r_movement,t_movement,"
         "surrogate_iterations,routing_iterations,ran_iterations\n";
  for (std::size_t i = 0; i < t.objective.size(); ++i) {
    out << i + 1 << ',' << format_number(t.objective[i]) << ','
        << format_number(t.expected_traffic[i]) << ',' << format_number(t.expected_outage[i])
        << ',' << format_number(t.r_movement[i]) << ',' << format_number(t.t_movement[i]) << ','
        << t.surrogate_iterations[i] << ',' << t.routing_iterations[i] << ','
        << t.ran_iterations[i] << '\n';
  }
  return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "algorithm,ap_budget,eta_mean,objective,expected_traffic,expected_outage,"
         "reserved_rate,reserved_bandwidth,iterations,converged\n";
  for (const auto& r : rows) {
    out << to_string(r.algorithm) << ',' << format_number(r.ap_budget) << ','
        << format_number(r.eta_mean) << ',' << format_number(r.terms.value()) << ','
        << format_number(r.terms.expected_traffic) << ',' << format_number(r.terms.expected_outage)
        << ',' << format_number(r.reserved_rate) << ',' << format_number(r.reserved_bandwidth)
        << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << '\n';
  }
  return out.str();
}

Json evaluation_json(const EvaluationReport& report) {
  Json doc;
  doc["schema"] = kEvaluationSchema;
  doc["scenarios"] = report.scenarios;
  doc["seed"] = report.seed;
  doc["delivery_rule"] = kDeliveryRule;
  Json algs = Json::array();
  for (const auto& a : report.algorithms) {
    Json cdf = Json::array();
    for (auto [x, p] : a.cdf) cdf.push_back({x, p});
    algs.push_back({{"algorithm", to_string(a.algorithm)},
                    {"converged", a.converged},
                    {"iterations", a.iterations},
                    {"objective", terms_json(a.terms, true)},
                    {"totals", {{"reserved_rate", a.reserved_rate},
                                {"reserved_bandwidth", a.reserved_bandwidth}}},
                    {"median_ratio", a.median},
                    {"cdf", std::move(cdf)}});
  }
  doc["algorithms"] = std::move(algs);
  return doc;
}

std::string evaluation_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "algorithm,scenario,ratio\n";
  for (const auto& a : report.algorithms) {
    for (std::size_t i = 0; i < a.ratios.size(); ++i) {
      out << to_string(a.algorithm) << ',' << i << ',' << format_number(a.ratios[i]) << '\n';
    }
  }
  return out.str();
}

std::string density_csv(const RecursiveKde& kde) {
  std::ostringstream out;
  out << "x,density\n";
  const auto grid = kde.grid();
  const auto dens = kde.density();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << format_number(grid[i]) << ',' << format_number(dens[i]) << '\n';
  }
  return out.str();
}

}  // namespace resv
