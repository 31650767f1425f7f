// lpvguide: synthesize cascade gains, simulate the closed loop, render plots.
//
// Exit status: 0 success, 1 unexpected error, 2 configuration or input error,
// 3 infeasible synthesis or failed validation, 4 simulation abort.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <lpvguide/config.hpp>
#include <lpvguide/gain_io.hpp>
#include <lpvguide/pipeline.hpp>
#include <lpvguide/svg.hpp>

namespace fs = std::filesystem;
using namespace lpvguide;

namespace {

enum Exit { kOk = 0, kError = 1, kConfig = 2, kInfeasible = 3, kAbort = 4 };

constexpr const char* kDynamicFile = "gains_dynamic.json";
constexpr const char* kKinematicFile = "gains_kinematic.json";

struct Options {
  std::string config;
  std::string out;
  std::string loop = "both";
  std::optional<double> horizon;
  std::string circuit;
  std::optional<unsigned> seed;
  std::string gains;
  std::string telemetry;
  std::string format = "svg";
};

RunConfig load(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : load_config(opt.config);
  apply_env_overrides(cfg);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (!opt.circuit.empty()) {
    cfg.waypoints.clear();
    cfg.waypoints_file = opt.circuit;
    // A circuit file is a loop only when it returns to its first point.
    std::vector<Waypoint> wps;
    try {
      wps = read_waypoints_file(opt.circuit);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    cfg.closed = wps.size() > 2 && std::hypot(wps.front().x - wps.back().x, wps.front().y - wps.back().y) < 1e-9;
  }
  cfg.validate();
  return cfg;
}

nlohmann::json report_json(const SynthesisResult& r) {
  using nlohmann::json;
  json vertices = json::array();
  const auto points = enumerate_vertices(r.gains.bounds);
  for (std::size_t i = 0; i < r.report.vertices.size(); ++i) {
    const auto& v = r.report.vertices[i];
    vertices.push_back({{"index", i},
                        {"point", std::vector<double>(points[i].data(), points[i].data() + points[i].size())},
                        {"max_real_eig", v.max_real},
                        {"passed", v.passed}});
  }
  json out = {{"status", std::string(to_string(r.solution.status))},
              {"newton_steps", r.solution.newton_steps},
              {"objective", r.solution.objective},
              {"gamma_bound", r.problem.config.gamma_bound},
              {"gamma_met", r.report.gamma_met},
              {"decay", r.report.decay},
              {"vertices", vertices},
              {"passed", r.report.passed}};
  if (r.report.certificate) {
    json blocks = json::array();
    for (const auto& b : r.report.certificate->blocks) {
      blocks.push_back({{"block", b.label}, {"margin", b.margin}, {"required", b.required}, {"satisfied", b.satisfied}});
    }
    out["certificate"] = {
        {"min_margin", r.report.certificate->min_margin}, {"passed", r.report.certificate->passed}, {"blocks", blocks}};
  }
  return out;
}

void print_summary(const std::string& kind, const SynthesisResult& r) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& v : r.report.vertices) worst = std::max(worst, v.max_real);
  std::cout << kind << ": " << r.gains.gains.size() << " vertex gains, status " << to_string(r.solution.status)
            << ", objective " << r.solution.objective << ", slowest vertex pole " << worst << " (decay "
            << r.report.decay << "), " << (r.report.passed ? "validated" : "VALIDATION FAILED") << '\n';
}

int cmd_synth(const Options& opt) {
  const RunConfig cfg = load(opt);
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const bool dynamic = opt.loop != "kinematic";
  const bool kinematic = opt.loop != "dynamic";

  nlohmann::json report = nlohmann::json::object();
  bool passed = true;
  std::vector<std::pair<fs::path, GainDocument>> docs;
  const auto run = [&](const std::string& kind, const SynthesisResult& r) {
    print_summary(kind, r);
    report[kind] = report_json(r);
    passed = passed && r.report.passed;
    docs.emplace_back(dir / (kind == "dynamic" ? kDynamicFile : kKinematicFile), make_gain_document(kind, r));
  };
  try {
    if (dynamic) run("dynamic", synthesize_dynamic(cfg));
    if (kinematic) run("kinematic", synthesize_kinematic(cfg));
  } catch (const InfeasibleSynthesis& e) {
    report["error"] = e.what();
    std::ofstream(dir / "synthesis_report.json") << report.dump(2) << '\n';
    throw;
  }
  std::ofstream(dir / "synthesis_report.json") << report.dump(2) << '\n';
  if (!passed) {
    std::cerr << "error: synthesized gains failed validation, see " << (dir / "synthesis_report.json").string()
              << '\n';
    return kInfeasible;
  }
  for (const auto& [path, doc] : docs) {
    save_gain_document(doc, path.string());
    std::cout << "wrote " << path.string() << '\n';
  }
  return kOk;
}

int cmd_simulate(const Options& opt) {
  const RunConfig cfg = load(opt);
  const fs::path dir = cfg.output_dir;
  const fs::path gains = opt.gains.empty() ? dir : fs::path(opt.gains);
  const GainDocument dyn = load_gain_document((gains / kDynamicFile).string(), cfg.dynamic_bounds, 2, 6);
  const GainDocument kin = load_gain_document((gains / kKinematicFile).string(), cfg.kinematic_bounds, 2, 3);

  ReferenceTrajectory traj;
  try {
    traj = plan_reference(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("planner: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("planner: ") + e.what());
  }
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "trajectory.csv");
    write_trajectory_csv(traj, out);
  }

  Scenario sc;
  try {
    sc = make_scenario(cfg, traj, dyn.set, kin.set);
    sc.step_count();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const fs::path tel = dir / "telemetry.csv";
  try {
    const Telemetry log = run_simulation(sc);
    write_telemetry(log, tel.string());
    const Metrics m = compute_metrics(log);
    write_metrics(m, (dir / "metrics.json").string());
    std::cout << "simulated " << log.size() << " steps (" << log.size() * cfg.ts_dyn << " s)\n"
              << to_json(m).dump(2) << '\n';
  } catch (const SimulationAbort& e) {
    write_telemetry(e.partial(), tel.string());
    std::cerr << "error: simulation aborted at t = " << e.time() << " s: " << e.what() << "\npartial telemetry in "
              << tel.string() << '\n';
    return kAbort;
  }
  return kOk;
}

int cmd_report(const Options& opt) {
  fs::path dir = opt.out.empty() ? fs::path(opt.telemetry).parent_path() : fs::path(opt.out);
  if (dir.empty()) dir = ".";
  Telemetry log;
  try {
    log = read_telemetry(opt.telemetry);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  if (log.empty()) throw ConfigError(opt.telemetry + ": telemetry has no data rows");
  const Metrics m = compute_metrics(log);
  if (opt.format == "svg") {
    for (const auto& p : svg::write_telemetry_plots(log, dir)) std::cout << "wrote " << p.string() << '\n';
  }
  fs::create_directories(dir);
  write_metrics(m, (dir / "metrics.json").string());
  if (opt.format == "csv-only") {
    std::ofstream out(dir / "metrics.csv");
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << "rmse_v,rmse_w,rmse_y,max_ev,max_ey\n"
        << m.rmse_v << ',' << m.rmse_w << ',' << m.rmse_y << ',' << m.max_ev << ',' << m.max_ey << '\n';
  }
  std::cout << to_json(m).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LPV gain-scheduled cascade guidance: synthesis, simulation and reports"};
  app.require_subcommand(1);
  Options opt;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "run configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides the configuration)");
  };

  auto* synth = app.add_subcommand("synth", "solve the LMI problems and write gain documents");
  common(synth);
  synth->add_option("--loop", opt.loop, "which loop to synthesize")
      ->check(CLI::IsMember({"kinematic", "dynamic", "both"}));

  auto* simulate = app.add_subcommand("simulate", "plan the reference and run the closed loop");
  common(simulate);
  simulate->add_option("--gains", opt.gains, "directory holding the gain documents (default: output directory)");
  simulate->add_option("--horizon", opt.horizon, "simulated time [s] (default: whole trajectory)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--circuit", opt.circuit, "waypoint file, one 'x y [speed]' per line")
      ->check(CLI::ExistingFile);
  simulate->add_option("--seed", opt.seed, "reserved; runs are deterministic");

  auto* report = app.add_subcommand("report", "render SVG plots and metrics from telemetry");
  report->add_option("--telemetry", opt.telemetry, "telemetry CSV")->required();
  report->add_option("--out", opt.out, "output directory (default: next to the telemetry)");
  report->add_option("--format", opt.format, "svg or csv-only")->check(CLI::IsMember({"svg", "csv-only"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*synth) return cmd_synth(opt);
    if (*simulate) return cmd_simulate(opt);
    return cmd_report(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const GainDocumentError& e) {
    std::cerr << "gain error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleSynthesis& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
