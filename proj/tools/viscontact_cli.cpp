#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "viscontact/config.hpp"
#include "viscontact/errors.hpp"
#include "viscontact/experiment.hpp"
#include "viscontact/output.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

constexpr double kReferenceMarker = 2.75;
constexpr double kReferenceB = 1e4;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string mode;
  int steps = 0;
  std::string snapshot_times;
};

viscontact::RunConfig resolve_config(const Options& opts) {
  viscontact::RunConfig cfg = viscontact::load_config(opts.config_path);
  if (!opts.mode.empty()) cfg.mode = viscontact::parse_mode(opts.mode, "--mode");
  if (opts.steps != 0) cfg.n_steps = opts.steps;
  if (!opts.snapshot_times.empty()) {
    cfg.snapshot_times = viscontact::parse_real_list(opts.snapshot_times, "--snapshot-times");
  }
  cfg.output_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

void print_run(const viscontact::RunResult& run, const viscontact::RunChecks& checks) {
  std::printf("%-13s b=%-8g t_c=%-8s max_pen=%.6g worst_vi=%.3g energy=%.3g wall=%.1fs %s\n", run.name.c_str(),
              run.relaxation_b, run.t_c ? std::to_string(*run.t_c).c_str() : "none", run.max_penetration,
              run.worst_vi, run.report.worst_energy_residual(), run.wall_seconds, checks.all() ? "PASS" : "FAIL");
}

int execute(const viscontact::RunConfig& cfg) {
  using namespace viscontact;
  const auto start = std::chrono::steady_clock::now();
  const int threads = threads_from_env();
  const AssemblyOptions assembly{threads};
  const Mesh mesh = config_mesh(cfg);
  const std::filesystem::path out = cfg.output_dir;
  std::filesystem::create_directories(out);
  {
    std::ofstream mesh_file(out / "mesh.txt");
    write_mesh(mesh_file, mesh);
  }

  std::vector<std::pair<std::string, double>> plan;
  switch (cfg.mode) {
    case RunMode::elastic: plan = {{"elastic", 0.0}}; break;
    case RunMode::viscoelastic:
    case RunMode::lipschitz: plan = {{"viscoelastic", cfg.relaxation_b}}; break;
    case RunMode::both: plan = {{"elastic", 0.0}, {"viscoelastic", cfg.relaxation_b}}; break;
  }

  std::vector<RunResult> runs(plan.size());
  std::vector<std::exception_ptr> failures(plan.size());
  auto work = [&](std::size_t i) {
    try {
      runs[i] = execute_run(cfg, mesh, plan[i].second, plan[i].first, assembly);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (threads > 1 && plan.size() > 1) {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < plan.size(); ++i) pool.emplace_back(work, i);
    for (auto& th : pool) th.join();
  } else {
    for (std::size_t i = 0; i < plan.size(); ++i) work(i);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  nlohmann::json summary;
  summary["config"] = config_json(cfg);
  nlohmann::json acceptance;
  bool all_pass = true;
  const RunResult* elastic = nullptr;
  const RunResult* visco = nullptr;
  for (const RunResult& run : runs) {
    emit_run(out / run.name, run, cfg);
    const RunChecks checks = evaluate_checks(run, cfg);
    print_run(run, checks);
    summary["runs"][run.name] = run_json(run, checks);
    summary["t_c_" + run.name] = run.t_c ? nlohmann::json(*run.t_c) : nlohmann::json(nullptr);
    acceptance[run.name + "_certificates"] = checks.all();
    all_pass = all_pass && checks.all();
    if (run.name == "elastic") {
      elastic = &run;
    } else {
      visco = &run;
    }
  }

  if (elastic != nullptr && visco != nullptr) {
    const bool ordered = visco->t_c && (!elastic->t_c || *visco->t_c < *elastic->t_c);
    acceptance["relaxation_ordering"] = ordered;
    if (cfg.is_reference_setup()) all_pass = all_pass && ordered;
    if (cfg.is_reference_setup() && cfg.relaxation_b == kReferenceB) {
      const bool marker = visco->t_c && *visco->t_c < kReferenceMarker &&
                          (!elastic->t_c || *elastic->t_c > kReferenceMarker);
      acceptance["reference_contact_times"] = marker;
      all_pass = all_pass && marker;
    }
  }
  if (visco != nullptr && cfg.is_reference_setup() && cfg.relaxation_b == kReferenceB) {
    const bool saturation = yield_saturated(*visco, 4.0) && yield_saturated(*visco, 5.0);
    const bool separation = separated(*visco, 1.5);
    acceptance["yield_saturation"] = saturation;
    acceptance["separation"] = separation;
    all_pass = all_pass && saturation && separation;
  }

  if (cfg.mode == RunMode::lipschitz) {
    const LipschitzStudy study = run_lipschitz_study(cfg, mesh, runs.front(), threads);
    summary["lipschitz"] = lipschitz_json(study);
    const bool bounded = study.ratios_bounded();
    const bool equivariant = study.scaling_error <= 1e-8;
    acceptance["lipschitz_bounded"] = bounded;
    acceptance["scaling_equivariance"] = equivariant;
    all_pass = all_pass && bounded && equivariant;
    std::printf("lipschitz     spread=");
    for (double s : study.spread) std::printf("%.4g ", s);
    std::printf("scaling_error=%.3g %s\n", study.scaling_error, bounded && equivariant ? "PASS" : "FAIL");
  }

  acceptance["all_pass"] = all_pass;
  summary["acceptance"] = acceptance;
  summary["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out / "summary.json", summary);
  std::printf("summary written to %s: %s\n", (out / "summary.json").string().c_str(), all_pass ? "PASS" : "FAIL");
  return all_pass ? kExitPass : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasistatic viscoelastic contact simulator with verification"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
  run->add_option("--config", opts.config_path, "key = value configuration file")->required();
  run->add_option("--out", opts.out_dir, "output directory")->required();
  run->add_option("--mode", opts.mode, "elastic, viscoelastic, both or lipschitz");
  run->add_option("--steps", opts.steps, "number of time steps")->check(CLI::PositiveNumber);
  run->add_option("--snapshot-times", opts.snapshot_times, "comma-separated snapshot times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  viscontact::RunConfig cfg;
  try {
    cfg = resolve_config(opts);
  } catch (const viscontact::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const viscontact::ValidationError& e) {
    std::cerr << "config error (" << e.key() << "): " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    return execute(cfg);
  } catch (const viscontact::NoConvergence& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
