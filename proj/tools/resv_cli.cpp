#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "resv/baselines.hpp"
#include "resv/bcd.hpp"
#include "resv/config.hpp"
#include "resv/errors.hpp"
#include "resv/evaluation.hpp"
#include "resv/kde.hpp"
#include "resv/report.hpp"
#include "resv/topology_gen.hpp"
#include "resv/topology_io.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNonConvergence = 3, kIo = 4 };

std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw resv::IoError("cannot create directory '" + dir + "': " + ec.message());
  return dir;
}

resv::RunConfig config_or_default(const std::string& path) {
  return path.empty() ? resv::RunConfig{} : resv::load_run_config(path);
}

std::vector<double> read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw resv::IoError("cannot open '" + path + "' for reading");
  std::vector<double> obs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    double v = 0.0;
    const char* b = line.data() + first;
    const char* e = line.data() + last + 1;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v)) {
      throw resv::ConfigError(path + ":" + std::to_string(n) + ": not a finite number");
    }
    obs.push_back(v);
  }
  if (obs.empty()) throw resv::ConfigError("'" + path + "' holds no observations");
  return obs;
}

struct Options {
  std::size_t workers = 0;

  std::uint64_t seed = 0;
  std::string scale = "paper";
  std::string out;

  std::string topology;
  std::string config;
  std::string algorithm = "bcd";
  std::string out_dir;
  std::optional<std::size_t> scenarios;

  std::string observations;
  double beta = 1.0;
  std::optional<double> grid_min;
  std::optional<double> grid_max;
  std::size_t grid_points = resv::RecursiveKde::kDefaultGridPoints;
};

int cmd_generate(const Options& o) {
  const resv::GeneratorParams params =
      o.scale == "desk" ? resv::GeneratorParams::desk_scale() : resv::GeneratorParams::paper_scale();
  const resv::Topology t = resv::generate_topology(params, o.seed);
  resv::save_topology(t, o.out);
  std::cout << "wrote " << o.out << ": " << t.nodes.size() << " nodes, " << t.links.size()
            << " links, " << t.users.size() << " users, " << t.paths.size() << " paths\n";
  return kOk;
}

int cmd_solve(const Options& o, resv::WorkerPool& pool) {
  const resv::RunConfig cfg = config_or_default(o.config);
  const resv::Algorithm alg = resv::algorithm_from_string(o.algorithm);
  const resv::Topology topo = resv::load_topology(o.topology);
  const resv::Models models = resv::build_models(topo, cfg.model);
  const resv::BcdResult res = resv::run_algorithm(alg, topo, models, cfg.solver, &pool);
  const auto dir = prepare_dir(o.out_dir.empty() ? cfg.output_dir : o.out_dir);
  const std::string name = resv::to_string(alg);
  const auto report = dir / ("report-" + name + ".json");
  const auto trace = dir / ("trace-" + name + ".csv");
  resv::write_text_file(report.string(),
                        resv::solve_report(topo, models, alg, res, cfg.solver.shared_downlink).dump(1) + "\n");
  resv::write_text_file(trace.string(), resv::trace_csv(res.trace));
  std::cout << name << ": objective " << resv::format_number(res.trace.objective.back())
            << " after " << res.iterations << " iterations"
            << (res.converged ? "" : " (not converged, best iterate written)") << "\n";
  return res.converged ? kOk : kNonConvergence;
}

int cmd_sweep(const Options& o, resv::WorkerPool& pool) {
  const resv::RunConfig cfg = config_or_default(o.config);
  const resv::Topology topo = resv::load_topology(o.topology);
  const auto rows = resv::run_sweep(topo, cfg.model, cfg.sweep, cfg.solver, &pool);
  const auto dir = prepare_dir(o.out_dir.empty() ? cfg.output_dir : o.out_dir);
  resv::write_text_file((dir / "sweep.csv").string(), resv::sweep_csv(rows));
  std::cout << "wrote " << rows.size() << " sweep rows to " << (dir / "sweep.csv").string() << "\n";
  const bool all = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
  return all ? kOk : kNonConvergence;
}

int cmd_estimate(const Options& o) {
  const std::vector<double> obs = read_observations(o.observations);
  const auto [lo, hi] = std::minmax_element(obs.begin(), obs.end());
  const double gmin = o.grid_min.value_or(*lo - 3.0);
  const double gmax = o.grid_max.value_or(*hi + 3.0);
  if (!(gmax > gmin)) throw resv::ConfigError("grid maximum must exceed the minimum");
  if (!(o.beta > 0.0)) throw resv::ConfigError("beta must be positive");
  if (o.grid_points < 2) throw resv::ConfigError("grid needs at least two points");
  resv::RecursiveKde kde(gmin, gmax, o.grid_points, o.beta);
  for (double x : obs) kde.update(x);
  resv::write_text_file(o.out, resv::density_csv(kde));
  std::cout << "wrote density of " << obs.size() << " observations to " << o.out << "\n";
  return kOk;
}

int cmd_evaluate(const Options& o, resv::WorkerPool& pool) {
  const resv::RunConfig cfg = config_or_default(o.config);
  const resv::Topology topo = resv::load_topology(o.topology);
  const resv::Models models = resv::build_models(topo, cfg.model);
  resv::RobustnessOptions ro;
  ro.scenarios = o.scenarios.value_or(cfg.evaluation.scenarios);
  ro.seed = cfg.seed;
  ro.shared_downlink = cfg.solver.shared_downlink;
  if (cfg.evaluation.demand_mean_shift != 0.0) {
    ro.scenario_models = resv::scale_demand_means(models, 1.0 + cfg.evaluation.demand_mean_shift);
  }
  if (ro.scenarios == 0) throw resv::ConfigError("at least one scenario is required");
  const resv::EvaluationReport rep =
      resv::run_robustness(topo, models, cfg.evaluation.algorithms, ro, cfg.solver, &pool);
  const auto dir = prepare_dir(o.out_dir.empty() ? cfg.output_dir : o.out_dir);
  resv::write_text_file((dir / "evaluation.json").string(), resv::evaluation_json(rep).dump(1) + "\n");
  resv::write_text_file((dir / "evaluation.csv").string(), resv::evaluation_csv(rep));
  bool all = true;
  for (const auto& a : rep.algorithms) {
    std::cout << resv::to_string(a.algorithm) << ": median supply-demand ratio "
              << resv::format_number(a.median) << "\n";
    all = all && a.converged;
  }
  return all ? kOk : kNonConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backhaul and RAN reservation under stochastic demand"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--workers", o.workers, "Worker threads (default: available cores)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));

  auto* gen = app.add_subcommand("generate", "Generate a synthetic topology");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--scale", o.scale, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  gen->add_option("--out", o.out, "Output topology file")->required();

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("--topology", o.topology, "Topology file")->required();
  solve->add_option("--config", o.config, "Run configuration");
  solve->add_option("--algorithm", o.algorithm, "bcd, single-path or average-based")
      ->check(CLI::IsMember({"bcd", "single-path", "average-based"}));
  solve->add_option("--out-dir", o.out_dir, "Output directory (default: config output_dir)");

  auto* sweep = app.add_subcommand("sweep", "Solve across the configured sweep axes");
  sweep->add_option("--topology", o.topology, "Topology file")->required();
  sweep->add_option("--config", o.config, "Run configuration")->required();
  sweep->add_option("--out-dir", o.out_dir, "Output directory");

  auto* est = app.add_subcommand("estimate", "Recursive kernel density estimate of observations");
  est->add_option("--observations", o.observations, "One number per line")->required();
  est->add_option("--out", o.out, "Output CSV")->required();
  est->add_option("--beta", o.beta, "Bandwidth exponent parameter");
  est->add_option("--grid-min", o.grid_min, "Grid start (default: min observation - 3)");
  est->add_option("--grid-max", o.grid_max, "Grid end (default: max observation + 3)");
  est->add_option("--grid-points", o.grid_points, "Grid size");

  auto* eval = app.add_subcommand("evaluate", "Monte-Carlo robustness evaluation");
  eval->add_option("--topology", o.topology, "Topology file")->required();
  eval->add_option("--config", o.config, "Run configuration");
  eval->add_option("--scenarios", o.scenarios, "Number of scenarios");
  eval->add_option("--out-dir", o.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(o);
    if (est->parsed()) return cmd_estimate(o);
    const std::size_t workers =
        o.workers ? o.workers : std::max(1u, std::thread::hardware_concurrency());
    resv::WorkerPool pool(workers);
    if (solve->parsed()) return cmd_solve(o, pool);
    if (sweep->parsed()) return cmd_sweep(o, pool);
    if (eval->parsed()) return cmd_evaluate(o, pool);
  } catch (const resv::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const resv::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const resv::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const resv::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
