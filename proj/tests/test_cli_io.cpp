#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "viscontact/config.hpp"
#include "viscontact/errors.hpp"
#include "viscontact/experiment.hpp"
#include "viscontact/output.hpp"

using namespace viscontact;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("viscontact_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VISCONTACT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

constexpr const char* kCoarse = "h_interior = 0.8\nh_contact = 0.25\nN = 10\nvi_probes = 50\nsigma_probes = 500\n";

}  // namespace

TEST_CASE("empty configuration gives the reference defaults") {
  const RunConfig cfg = parse_config("");
  CHECK(cfg.young_E == 1e4);
  CHECK(cfg.poisson_kappa == 0.4);
  CHECK(cfg.relaxation_b == 1e4);
  CHECK(cfg.yield_F == 10.0);
  CHECK(cfg.amplitude == 10.0);
  CHECK(cfg.T_end == 5.0);
  CHECK(cfg.n_steps == 100);
  CHECK(cfg.mode == RunMode::both);
  CHECK(cfg.is_reference_setup());
  CHECK(cfg.f2y(1.0) == doctest::Approx(10.0 * std::sin(1.0)));
}

TEST_CASE("configuration parsing") {
  const RunConfig cfg = parse_config(
      "# comment line\n"
      "\n"
      "b = 0   # elastic material\n"
      "kappa=0.3\n"
      "mode = elastic\n"
      "load_shape = constant\n"
      "snapshot_times = 1, 2.5\n"
      "diagonal_scaling = false\n"
      "seed = 42\n");
  CHECK(cfg.relaxation_b == 0.0);
  CHECK(cfg.poisson_kappa == 0.3);
  CHECK(cfg.mode == RunMode::elastic);
  CHECK(cfg.load_shape == LoadShape::constant);
  CHECK(cfg.f2y(3.0) == 10.0);
  REQUIRE(cfg.snapshot_times.size() == 2);
  CHECK(cfg.snapshot_times[1] == 2.5);
  CHECK_FALSE(cfg.diagonal_scaling);
  CHECK(cfg.seed == 42);
  CHECK_FALSE(cfg.is_reference_setup());

  const Model model = config_model(cfg, triangulate(build_reference_domain(), 0.8, 0.25), cfg.relaxation_b);
  CHECK(model.material.relaxation.at_lag(0) == 0.0);
}

TEST_CASE("configuration errors") {
  try {
    parse_config("kappa = 0.5\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.key() == "kappa");
  }
  try {
    parse_config("E = 1\n\nfoo = 3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("E = 1\nE = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config("E = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config("no separator\n"), ParseError);
  CHECK_THROWS_AS(parse_config("N = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("mode = sideways\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("h_contact = 1\nh_interior = 0.5\n"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/viscontact.cfg"), ParseError);
  CHECK(parse_real_list("1.5,2.75", "x") == std::vector<double>{1.5, 2.75});
  CHECK_THROWS_AS(parse_real_list("1.5,,2", "x"), Error);
}

TEST_CASE("time series and snapshot roundtrip") {
  RunConfig cfg = parse_config(kCoarse);
  const Mesh mesh = config_mesh(cfg);
  const RunResult run = execute_run(cfg, mesh, cfg.relaxation_b, "viscoelastic");
  const auto rows = timeseries_rows(run.model, run.traj, &run.report, cfg);
  REQUIRE(rows.size() == 10);

  std::stringstream csv;
  write_timeseries(csv, rows);
  const auto back = read_timeseries(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].t == rows[i].t);
    CHECK(back[i].min_u_nu == rows[i].min_u_nu);
    CHECK(back[i].total_normal_force == rows[i].total_normal_force);
    CHECK(back[i].sigma_violation == rows[i].sigma_violation);
    CHECK(back[i].inner_iterations == rows[i].inner_iterations);
  }

  std::stringstream bad("t,f2y\n1,2\n");
  CHECK_THROWS_AS(read_timeseries(bad), ParseError);

  const StepRecord& rec = run.traj.steps[4];
  std::stringstream snap_text;
  write_snapshot(snap_text, run.model, rec);
  const Snapshot snap = read_snapshot(snap_text);
  CHECK(snap.mesh.num_nodes() == mesh.num_nodes());
  REQUIRE(snap.field("step") != nullptr);
  CHECK(snap.field("step")->rows[0][1] == rec.t);
  REQUIRE(snap.field("displacement") != nullptr);
  CHECK(snap.field("displacement")->rows.size() == mesh.num_nodes());
  REQUIRE(snap.field("stress") != nullptr);
  CHECK(snap.field("stress")->rows[0][3] == rec.stress[0].yy);
  const SnapshotField* contact = snap.field("contact");
  REQUIRE(contact != nullptr);
  REQUIRE(contact->rows.size() == run.model.contact.size());
  for (std::size_t p = 0; p < contact->rows.size(); ++p) {
    CHECK(contact->rows[p][2] == rec.traction.normal[p]);
  }
  CHECK(snapshot_file_name(1.5) == "snapshot_t1.5000.txt");
}

TEST_CASE("zero load run has zero displacement and force columns") {
  RunConfig cfg = parse_config(std::string(kCoarse) + "amplitude = 0\n");
  const Mesh mesh = config_mesh(cfg);
  const Model model = config_model(cfg, mesh, cfg.relaxation_b);
  const Trajectory traj = run_simulation(model, solver_config(cfg));
  for (const auto& row : timeseries_rows(model, traj, nullptr, cfg)) {
    CHECK(row.f2y == 0.0);
    CHECK(row.min_u_nu == 0.0);
    CHECK(row.min_u_y == 0.0);
    CHECK(row.max_penetration == 0.0);
    CHECK(row.total_normal_force == 0.0);
    CHECK(row.max_abs_sigma_tau == 0.0);
  }
}

TEST_CASE("command line: configuration errors exit with code 3") {
  const fs::path dir = scratch_dir("cli_errors");
  const fs::path bad = write_file(dir / "bad.cfg", "kappa = 0.5\n");
  CHECK(run_cli("run --config " + bad.string() + " --out " + (dir / "out").string()) == 3);
  const fs::path unknown = write_file(dir / "unknown.cfg", "colour = blue\n");
  CHECK(run_cli("run --config " + unknown.string() + " --out " + (dir / "out").string()) == 3);
  CHECK(run_cli("run --out " + (dir / "out").string()) == 3);
  const fs::path good = write_file(dir / "good.cfg", kCoarse);
  CHECK(run_cli("run --config " + good.string() + " --out " + (dir / "out").string() + " --mode sideways") == 3);
}

TEST_CASE("command line: iteration cap exits with code 2") {
  const fs::path dir = scratch_dir("cli_noconv");
  const fs::path cfg = write_file(dir / "cap.cfg", std::string(kCoarse) + "max_inner_iters = 2\nmode = elastic\n");
  CHECK(run_cli("run --config " + cfg.string() + " --out " + (dir / "out").string()) == 2);
}

TEST_CASE("command line: both mode writes the summary and per-run outputs") {
  const fs::path dir = scratch_dir("cli_both");
  const fs::path cfg = write_file(dir / "both.cfg", kCoarse);
  const fs::path out = dir / "out";
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out.string() + " --snapshot-times 1.5,4") == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary.contains("t_c_elastic"));
  CHECK(summary.contains("t_c_viscoelastic"));
  CHECK(summary["runs"].contains("elastic"));
  CHECK(summary["runs"].contains("viscoelastic"));
  CHECK(summary["acceptance"]["all_pass"] == true);
  CHECK(fs::exists(out / "mesh.txt"));
  for (const char* run : {"elastic", "viscoelastic"}) {
    CHECK(fs::exists(out / run / "timeseries.csv"));
    CHECK(fs::exists(out / run / "snapshot_t1.5000.txt"));
    CHECK(fs::exists(out / run / "snapshot_t4.0000.txt"));
    std::ifstream csv(out / run / "timeseries.csv");
    CHECK(read_timeseries(csv).size() == 10);
  }
}

TEST_CASE("command line: a single elastic run has no viscoelastic fields") {
  const fs::path dir = scratch_dir("cli_elastic");
  const fs::path cfg = write_file(dir / "el.cfg", kCoarse);
  const fs::path out = dir / "out";
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out.string() + " --mode elastic --steps 6") == 0);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary.contains("t_c_elastic"));
  CHECK_FALSE(summary.contains("t_c_viscoelastic"));
  CHECK_FALSE(summary["runs"].contains("viscoelastic"));
  CHECK_FALSE(fs::exists(out / "viscoelastic"));
  CHECK(summary["config"]["N"] == 6);
}

TEST_CASE("command line: lipschitz mode reports a ratio table") {
  const fs::path dir = scratch_dir("cli_lipschitz");
  const fs::path cfg = write_file(dir / "lip.cfg", std::string(kCoarse) + "mode = lipschitz\n");
  const fs::path out = dir / "out";
  CHECK(run_cli("run --config " + cfg.string() + " --out " + out.string()) == 0);
  const auto summary = read_json(out / "summary.json");
  REQUIRE(summary.contains("lipschitz"));
  CHECK(summary["lipschitz"]["scales"].size() >= 3);
  CHECK(summary["lipschitz"]["samples"].size() == 3 * summary["lipschitz"]["scales"].size());
  CHECK(summary["acceptance"]["lipschitz_bounded"] == true);
}
