#include "viscontact/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "viscontact/errors.hpp"

namespace viscontact {

namespace {

constexpr int kDigits = 17;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

double* row_field(TimeseriesRow& r, std::size_t c) {
  double* fields[] = {&r.t,
                      &r.f2y,
                      &r.min_u_nu,
                      &r.min_u_y,
                      &r.max_penetration,
                      &r.total_normal_force,
                      &r.max_abs_sigma_tau,
                      &r.energy_residual,
                      &r.vi_residual,
                      &r.complementarity_max,
                      &r.sigma_violation,
                      &r.inclusion_violation,
                      &r.inner_iterations};
  return fields[c];
}

}  // namespace

const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> columns = {
      "t",           "f2y",        "min_u_nu",           "min_u_y",         "max_penetration",
      "total_normal_force",        "max_abs_sigma_tau",  "energy_residual", "vi_residual",
      "complementarity_max",       "sigma_violation",    "inclusion_violation", "inner_iterations"};
  return columns;
}

std::vector<TimeseriesRow> timeseries_rows(const Model& model, const Trajectory& traj,
                                           const AdmissibilityReport* report, const RunConfig& cfg) {
  const ContactData& contact = model.contact;
  std::vector<TimeseriesRow> rows;
  rows.reserve(traj.steps.size());
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const StepRecord& rec = traj.steps[i];
    TimeseriesRow row;
    row.t = rec.t;
    row.f2y = cfg.f2y(rec.t);
    const auto un = normal_displacements(rec.u, contact);
    if (!un.empty()) {
      row.min_u_nu = *std::min_element(un.begin(), un.end());
      row.max_penetration = std::max(0.0, *std::max_element(un.begin(), un.end()));
      row.min_u_y = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < contact.size(); ++p) {
        const int ydof = model.dofs.dof(contact.nodes[p], 1);
        row.min_u_y = std::min(row.min_u_y, rec.u[ydof]);
      }
    }
    for (std::size_t p = 0; p < contact.size(); ++p) {
      row.total_normal_force += contact.weights[p] * rec.traction.normal[p];
      row.max_abs_sigma_tau = std::max(row.max_abs_sigma_tau, std::abs(rec.traction.tangential[p]));
    }
    row.energy_residual = rec.diag.energy_residual;
    row.vi_residual = rec.diag.vi_violation;
    row.complementarity_max = rec.diag.complementarity_max;
    if (report != nullptr && i < report->rows.size()) {
      row.sigma_violation = report->rows[i].sigma_violation;
      row.inclusion_violation = report->rows[i].inclusion_violation;
    }
    row.inner_iterations = static_cast<double>(rec.diag.iterations);
    rows.push_back(row);
  }
  return rows;
}

void write_timeseries(std::ostream& os, const std::vector<TimeseriesRow>& rows) {
  const auto& cols = timeseries_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  const auto old = os.precision(kDigits);
  for (TimeseriesRow r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << *row_field(r, c);
    os << '\n';
  }
  os.precision(old);
}

std::vector<TimeseriesRow> read_timeseries(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("read_timeseries: missing header", 1);
  std::string expected;
  for (const auto& c : timeseries_columns()) expected += (expected.empty() ? "" : ",") + c;
  if (line != expected) throw ParseError("read_timeseries: unexpected header", 1);
  std::vector<TimeseriesRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    TimeseriesRow r;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= timeseries_columns().size()) throw ParseError("read_timeseries: too many columns", line_no);
      try {
        *row_field(r, c) = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("read_timeseries: bad number '" + cell + "'", line_no);
      }
      ++c;
    }
    if (c != timeseries_columns().size()) throw ParseError("read_timeseries: too few columns", line_no);
    rows.push_back(r);
  }
  return rows;
}

void write_snapshot(std::ostream& os, const Model& model, const StepRecord& rec) {
  const Mesh& mesh = model.mesh;
  write_mesh(os, mesh);
  const auto old = os.precision(kDigits);
  os << "field step 1\n" << rec.index << ' ' << rec.t << '\n';

  auto nodal = [&](std::size_t node, int c) {
    const int d = model.dofs.dof(static_cast<int>(node), c);
    return d < 0 ? 0.0 : rec.u[d];
  };
  os << "field displacement " << mesh.num_nodes() << '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) os << i << ' ' << nodal(i, 0) << ' ' << nodal(i, 1) << '\n';
  os << "field deformed " << mesh.num_nodes() << '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    os << i << ' ' << mesh.nodes[i].x + nodal(i, 0) << ' ' << mesh.nodes[i].y + nodal(i, 1) << '\n';
  }
  os << "field stress " << rec.stress.size() << '\n';
  for (std::size_t t = 0; t < rec.stress.size(); ++t) {
    const Sym2& s = rec.stress[t];
    os << t << ' ' << s.xx << ' ' << s.xy << ' ' << s.yy << '\n';
  }
  const ContactData& contact = model.contact;
  const auto un = normal_displacements(rec.u, contact);
  os << "field contact " << contact.size() << '\n';
  for (std::size_t p = 0; p < contact.size(); ++p) {
    os << contact.nodes[p] << ' ' << un[p] << ' ' << rec.traction.normal[p] << ' ' << rec.traction.tangential[p]
       << '\n';
  }
  os.precision(old);
}

const SnapshotField* Snapshot::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Snapshot read_snapshot(std::istream& is) {
  Snapshot snap;
  snap.mesh = read_mesh(is);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream head(line);
    std::string word;
    SnapshotField field;
    std::size_t count = 0;
    if (!(head >> word >> field.name >> count) || word != "field") {
      throw ParseError("read_snapshot: expected 'field <name> <count>'", 0);
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(is, line)) throw ParseError("read_snapshot: truncated field " + field.name, 0);
      std::istringstream row(line);
      std::vector<double> values;
      std::string cell;
      while (row >> cell) values.push_back(std::stod(cell));
      field.rows.push_back(std::move(values));
    }
    snap.fields.push_back(std::move(field));
  }
  return snap;
}

std::string snapshot_file_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%.4f.txt", t);
  return buf;
}

void emit_run(const std::filesystem::path& dir, const RunResult& run, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "timeseries.csv");
    write_timeseries(out, timeseries_rows(run.model, run.traj, &run.report, cfg));
  }
  for (double t : cfg.snapshot_times) {
    if (run.traj.steps.empty()) break;
    const StepRecord& rec = run.traj.steps[nearest_step(run.traj, t)];
    auto out = open_output(dir / snapshot_file_name(rec.t));
    write_snapshot(out, run.model, rec);
  }
}

nlohmann::json config_json(const RunConfig& cfg) {
  return {{"E", cfg.young_E},
          {"kappa", cfg.poisson_kappa},
          {"b", cfg.relaxation_b},
          {"F", cfg.yield_F},
          {"amplitude", cfg.amplitude},
          {"load_shape", to_string(cfg.load_shape)},
          {"T", cfg.T_end},
          {"N", cfg.n_steps},
          {"h_interior", cfg.h_interior},
          {"h_contact", cfg.h_contact},
          {"opt_tol", cfg.opt_tol},
          {"max_inner_iters", cfg.max_inner_iters},
          {"restart_period", cfg.restart_period},
          {"diagonal_scaling", cfg.diagonal_scaling},
          {"vi_probes", cfg.vi_probes},
          {"sigma_probes", cfg.sigma_probes},
          {"candidate_probes", cfg.candidate_probes},
          {"candidate_steps", cfg.candidate_steps},
          {"certificate_tol", cfg.certificate_tol},
          {"seed", cfg.seed},
          {"mode", to_string(cfg.mode)},
          {"snapshot_times", cfg.snapshot_times},
          {"lipschitz_scales", cfg.lipschitz_scales}};
}

nlohmann::json run_json(const RunResult& run, const RunChecks& checks) {
  nlohmann::json j;
  j["b"] = run.relaxation_b;
  j["t_c"] = run.t_c ? nlohmann::json(*run.t_c) : nlohmann::json(nullptr);
  j["max_penetration"] = run.max_penetration;
  j["max_abs_sigma_tau"] = run.max_abs_sigma_tau;
  j["worst_vi_residual"] = run.worst_vi;
  j["worst_energy_residual"] = run.report.worst_energy_residual();
  j["worst_sigma_violation"] = run.report.worst_sigma_violation();
  j["worst_inclusion_violation"] = run.report.worst_inclusion_violation();
  j["worst_complementarity"] = run.report.worst_complementarity();
  j["roundtrip_error"] = run.roundtrip_error;
  j["wall_clock_s"] = run.wall_seconds;
  std::size_t iterations = 0;
  for (const auto& s : run.traj.steps) iterations += s.diag.iterations;
  j["inner_iterations"] = iterations;
  j["checks"] = {{"vi_certified", checks.vi_certified},     {"energy_identity", checks.energy_identity},
                 {"sigma_membership", checks.sigma_membership}, {"inclusion", checks.inclusion},
                 {"roundtrip", checks.roundtrip},           {"frictionless", checks.frictionless},
                 {"complementarity", checks.complementarity}};
  return j;
}

nlohmann::json lipschitz_json(const LipschitzStudy& study) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : study.samples) {
    rows.push_back({{"dF", s.perturbation.dF},
                    {"df2", s.perturbation.df2},
                    {"numerator", s.numerator},
                    {"denominator", s.denominator},
                    {"ratio", s.ratio}});
  }
  return {{"scales", study.scales},
          {"samples", rows},
          {"spread", study.spread},
          {"scaling_error", study.scaling_error}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

}  // namespace viscontact
