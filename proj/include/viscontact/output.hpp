#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "viscontact/experiment.hpp"

namespace viscontact {

/// One CSV row per time step.
struct TimeseriesRow {
  double t = 0.0;
  double f2y = 0.0;
  double min_u_nu = 0.0;
  double min_u_y = 0.0;
  double max_penetration = 0.0;
  double total_normal_force = 0.0;  // sum_p weight_p sigma_nu(p)
  double max_abs_sigma_tau = 0.0;
  double energy_residual = 0.0;
  double vi_residual = 0.0;
  double complementarity_max = 0.0;
  double sigma_violation = 0.0;
  double inclusion_violation = 0.0;
  double inner_iterations = 0.0;
};

/// Column names in file order.
const std::vector<std::string>& timeseries_columns();

/// Rows of a run; `report` may be null, leaving its columns at zero.
std::vector<TimeseriesRow> timeseries_rows(const Model& model, const Trajectory& traj,
                                           const AdmissibilityReport* report, const RunConfig& cfg);

void write_timeseries(std::ostream& os, const std::vector<TimeseriesRow>& rows);
/// Inverse of write_timeseries. Throws ParseError on malformed input.
std::vector<TimeseriesRow> read_timeseries(std::istream& is);

/// Mesh export followed by `field <name> <count>` blocks: step (index, t),
/// displacement (node ux uy), deformed (node x y), stress (triangle sxx sxy
/// syy) and contact (node u_nu sigma_nu sigma_tau).
void write_snapshot(std::ostream& os, const Model& model, const StepRecord& rec);

/// A named block of a snapshot file: one row of numbers per entity.
struct SnapshotField {
  std::string name;
  std::vector<std::vector<double>> rows;
};

struct Snapshot {
  Mesh mesh;
  std::vector<SnapshotField> fields;
  const SnapshotField* field(const std::string& name) const;
};

Snapshot read_snapshot(std::istream& is);

/// Writes timeseries.csv and the snapshot files of a run into `dir`.
void emit_run(const std::filesystem::path& dir, const RunResult& run, const RunConfig& cfg);

nlohmann::json config_json(const RunConfig& cfg);
nlohmann::json run_json(const RunResult& run, const RunChecks& checks);
nlohmann::json lipschitz_json(const LipschitzStudy& study);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// File name used for the snapshot closest to time t.
std::string snapshot_file_name(double t);

}  // namespace viscontact
