#include "resv/config.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>

#include "resv/errors.hpp"

namespace resv {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + " " + what);
}

void allow_only(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(where, "has unknown key '" + key + "'");
  }
}

double get_number(const Json& obj, const char* key, const std::string& where, double fallback,
                  double min, bool min_inclusive) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string name = where + "." + key;
  if (!it->is_number()) fail(name, "must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v) || v < min || (!min_inclusive && v == min)) {
    fail(name, std::string("must be ") + (min_inclusive ? ">= " : "> ") + std::to_string(min));
  }
  return v;
}

std::size_t get_count(const Json& obj, const char* key, const std::string& where,
                      std::size_t fallback, std::size_t min) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string name = where + "." + key;
  if (!it->is_number_integer() || it->get<long long>() < static_cast<long long>(min)) {
    fail(name, "must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(it->get<long long>());
}

bool get_bool(const Json& obj, const char* key, const std::string& where, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(where + "." + key, "must be a boolean");
  return it->get<bool>();
}

std::vector<double> get_numbers(const Json& obj, const char* key, const std::string& where,
                                std::vector<double> fallback, double min) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string name = where + "." + key;
  if (!it->is_array()) fail(name, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number() || !std::isfinite(v.get<double>()) || v.get<double>() < min) {
      fail(name, "must hold finite numbers >= " + std::to_string(min));
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<Algorithm> get_algorithms(const Json& obj, const char* key, const std::string& where,
                                      std::vector<Algorithm> fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  const std::string name = where + "." + key;
  if (!it->is_array() || it->empty()) fail(name, "must be a nonempty array of algorithm names");
  std::vector<Algorithm> out;
  for (const auto& v : *it) {
    if (!v.is_string()) fail(name, "must hold strings");
    out.push_back(algorithm_from_string(v.get<std::string>()));
  }
  return out;
}

const Json& section(const Json& doc, const char* key) {
  static const Json empty = Json::object();
  auto it = doc.find(key);
  return it == doc.end() ? empty : *it;
}

Json algorithms_json(const std::vector<Algorithm>& algorithms) {
  Json a = Json::array();
  for (Algorithm x : algorithms) a.push_back(to_string(x));
  return a;
}

}  // namespace

RunConfig parse_run_config(const Json& doc) {
  allow_only(doc, "document", {"schema", "seed", "model", "solver", "sweep", "evaluation", "output_dir"});
  RunConfig c;
  auto schema = doc.find("schema");
  if (schema == doc.end() || !schema->is_string() || schema->get<std::string>() != kConfigSchema) {
    fail("document.schema", std::string("must be '") + kConfigSchema + "'");
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) fail("document.seed", "must be a nonnegative integer");
    c.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("output_dir"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>().empty()) fail("document.output_dir", "must be a nonempty string");
    c.output_dir = it->get<std::string>();
  }

  const Json& model = section(doc, "model");
  allow_only(model, "model", {"channel", "theta", "shared_downlink", "kde_beta"});
  if (auto it = model.find("channel"); it != model.end()) {
    const std::string ch = it->is_string() ? it->get<std::string>() : "";
    if (ch == "deterministic") {
      c.model.deterministic = true;
    } else if (ch != "rayleigh") {
      fail("model.channel", "must be 'rayleigh' or 'deterministic'");
    }
  }
  if (auto it = model.find("theta"); it != model.end() && !it->is_null()) {
    c.model.theta = get_number(model, "theta", "model", 0.0, 0.0, true);
  }
  c.solver.shared_downlink = get_bool(model, "shared_downlink", "model", false);
  c.kde_beta = get_number(model, "kde_beta", "model", c.kde_beta, 0.0, false);

  const Json& s = section(doc, "solver");
  allow_only(s, "solver",
             {"bcd_tolerance", "bcd_max_iterations", "mu_initial", "mu_tolerance",
              "routing_max_iterations", "surrogate_tolerance", "max_surrogate_iterations", "kappa",
              "ran_tolerance", "ran_max_iterations", "zeta_min", "t_min"});
  BcdConfig& b = c.solver;
  b.tolerance = get_number(s, "bcd_tolerance", "solver", b.tolerance, 0.0, false);
  b.max_iterations = get_count(s, "bcd_max_iterations", "solver", b.max_iterations, 1);
  b.routing.mu_initial = get_number(s, "mu_initial", "solver", b.routing.mu_initial, 0.0, false);
  b.routing.mu_tolerance = get_number(s, "mu_tolerance", "solver", b.routing.mu_tolerance, 0.0, false);
  b.routing.max_iterations = get_count(s, "routing_max_iterations", "solver", b.routing.max_iterations, 1);
  b.routing.surrogate_tolerance =
      get_number(s, "surrogate_tolerance", "solver", b.routing.surrogate_tolerance, 0.0, false);
  b.routing.max_surrogate_iterations =
      get_count(s, "max_surrogate_iterations", "solver", b.routing.max_surrogate_iterations, 1);
  b.routing.kappa = get_number(s, "kappa", "solver", b.routing.kappa, 0.0, false);
  b.ran.tolerance = get_number(s, "ran_tolerance", "solver", b.ran.tolerance, 0.0, false);
  b.ran.max_iterations = get_count(s, "ran_max_iterations", "solver", b.ran.max_iterations, 1);
  b.ran.zeta_min = get_number(s, "zeta_min", "solver", b.ran.zeta_min, 0.0, false);
  b.ran.t_min = get_number(s, "t_min", "solver", b.ran.t_min, 0.0, false);

  const Json& sw = section(doc, "sweep");
  allow_only(sw, "sweep", {"ap_budgets", "eta_means", "algorithms"});
  c.sweep.ap_budgets = get_numbers(sw, "ap_budgets", "sweep", {}, 0.0);
  c.sweep.eta_means = get_numbers(sw, "eta_means", "sweep", {}, -std::numeric_limits<double>::max());
  c.sweep.algorithms = get_algorithms(sw, "algorithms", "sweep", c.sweep.algorithms);

  const Json& ev = section(doc, "evaluation");
  allow_only(ev, "evaluation", {"scenarios", "demand_mean_shift", "algorithms"});
  c.evaluation.scenarios = get_count(ev, "scenarios", "evaluation", c.evaluation.scenarios, 1);
  c.evaluation.demand_mean_shift =
      get_number(ev, "demand_mean_shift", "evaluation", 0.0, -1.0, false);
  c.evaluation.algorithms = get_algorithms(ev, "algorithms", "evaluation", c.evaluation.algorithms);
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

Json run_config_to_json(const RunConfig& c) {
  Json doc;
  doc["schema"] = kConfigSchema;
  doc["seed"] = c.seed;
  doc["model"] = {{"channel", c.model.deterministic ? "deterministic" : "rayleigh"},
                  {"theta", c.model.theta ? Json(*c.model.theta) : Json(nullptr)},
                  {"shared_downlink", c.solver.shared_downlink},
                  {"kde_beta", c.kde_beta}};
  const BcdConfig& b = c.solver;
  doc["solver"] = {{"bcd_tolerance", b.tolerance},
                   {"bcd_max_iterations", b.max_iterations},
                   {"mu_initial", b.routing.mu_initial},
                   {"mu_tolerance", b.routing.mu_tolerance},
                   {"routing_max_iterations", b.routing.max_iterations},
                   {"surrogate_tolerance", b.routing.surrogate_tolerance},
                   {"max_surrogate_iterations", b.routing.max_surrogate_iterations},
                   {"kappa", b.routing.kappa},
                   {"ran_tolerance", b.ran.tolerance},
                   {"ran_max_iterations", b.ran.max_iterations},
                   {"zeta_min", b.ran.zeta_min},
                   {"t_min", b.ran.t_min}};
  doc["sweep"] = {{"ap_budgets", c.sweep.ap_budgets},
                  {"eta_means", c.sweep.eta_means},
                  {"algorithms", algorithms_json(c.sweep.algorithms)}};
  doc["evaluation"] = {{"scenarios", c.evaluation.scenarios},
                       {"demand_mean_shift", c.evaluation.demand_mean_shift},
                       {"algorithms", algorithms_json(c.evaluation.algorithms)}};
  doc["output_dir"] = c.output_dir;
  return doc;
}

}  // namespace resv
