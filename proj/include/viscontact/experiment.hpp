#pragma once

#include <optional>
#include <string>
#include <vector>

#include "viscontact/config.hpp"
#include "viscontact/duality.hpp"

namespace viscontact {

/// Load of a configuration: vertical traction f2y(t) on the arc.
LoadSpec config_load(const RunConfig& cfg);
SolverConfig solver_config(const RunConfig& cfg);
Mesh config_mesh(const RunConfig& cfg);
/// Model for `cfg` with the relaxation coefficient replaced by `b`.
Model config_model(const RunConfig& cfg, const Mesh& mesh, double b, AssemblyOptions opts = {});

/// One completed simulation together with its certificates.
struct RunResult {
  std::string name;
  double relaxation_b = 0.0;
  Model model;
  Trajectory traj;
  AdmissibilityReport report;
  double roundtrip_error = 0.0;
  double wall_seconds = 0.0;
  std::optional<double> t_c;
  double max_penetration = 0.0;
  double max_abs_sigma_tau = 0.0;
  double worst_vi = 0.0;
};

RunResult execute_run(const RunConfig& cfg, const Mesh& mesh, double b, std::string name, AssemblyOptions opts = {});

/// Pass/fail of the per-run certificates.
struct RunChecks {
  bool vi_certified = false;
  bool energy_identity = false;
  bool sigma_membership = false;
  bool inclusion = false;
  bool roundtrip = false;
  bool frictionless = false;
  bool complementarity = false;
  bool all() const;
};

inline constexpr double kEnergyTol = 1e-7;
inline constexpr double kRoundtripTol = 1e-8;
inline constexpr double kFrictionlessTol = 1e-8;   // times F
inline constexpr double kComplementarityTol = 1e-2;  // times F
inline constexpr std::size_t kMinSigmaProbes = 500;

RunChecks evaluate_checks(const RunResult& run, const RunConfig& cfg);

/// Index into traj.steps of the step closest to time t.
std::size_t nearest_step(const Trajectory& traj, double t);

/// Every contact node penetrates and sigma_nu = -F within `rel_tol`.
bool yield_saturated(const RunResult& run, double t, double rel_tol = 0.02);
/// Every contact node separated and |sigma_nu| <= `stress_tol`.
bool separated(const RunResult& run, double t, double stress_tol = 0.05);

struct LipschitzStudy {
  std::vector<double> scales;
  std::vector<LipschitzSample> samples;  // families (F), (f2), (F and f2) per scale
  /// max ratio / min ratio across scales, per family.
  std::vector<double> spread;
  double scaling_error = 0.0;  // elastic lambda = 2 equivariance
  bool ratios_bounded(double factor = 5.0) const;
};

LipschitzStudy run_lipschitz_study(const RunConfig& cfg, const Mesh& mesh, const RunResult& base, int threads);

}  // namespace viscontact
