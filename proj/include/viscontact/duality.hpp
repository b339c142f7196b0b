#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/SparseCholesky>

#include "viscontact/solver.hpp"

namespace viscontact {

/// Probe directions used to test membership in the admissible stress set.
struct ProbeOptions {
  int n_random = 500;               // Gaussian directions
  bool coordinate = true;           // +/- every coordinate direction
  std::uint64_t seed = 20240607;
  std::vector<Vector> extra;        // additional directions, e.g. the current u_i
};

struct SigmaCheck {
  /// Most negative value of (q(tau).v + j(v) - f.v) / (|v| * scale), 0 if none.
  double min_value = 0.0;
  double scale = 0.0;  // |q| + |f| + |alpha|
  std::size_t probes = 0;
  bool admissible(double tol) const { return min_value >= -tol; }
};

/// Membership test for the admissible set in force form: q is the Riesz
/// vector of a stress field, q.v = (tau, eps(v))_Q.
SigmaCheck check_force_admissible(const Vector& q, const Vector& f, const ContactData& contact,
                                  const ProbeOptions& probes);

/// Membership of an element stress field in the admissible set at load f.
SigmaCheck check_sigma_admissible(const std::vector<Sym2>& sigma, const Vector& f, const Mesh& mesh,
                                  const DofMap& dofs, const ContactData& contact, const ProbeOptions& probes);

/// Least-squares inverse of the strain operator: the DOF vector u minimizing
/// sum_T area_T |eps(u)|_T - omega_T|^2, via a factorization of the strain Gram
/// matrix.
class StrainRecovery {
 public:
  StrainRecovery(const Mesh& mesh, const DofMap& dofs);

  Vector displacement(const std::vector<Sym2>& omega) const;
  /// G^{-1} f: the displacement whose strain represents the load f.
  Vector lift(const Vector& f) const;
  /// eps(G^{-1} f).
  std::vector<Sym2> lifted_strain(const Vector& f) const;

 private:
  const Mesh* mesh_;
  const DofMap* dofs_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

Vector strain_to_displacement(const std::vector<Sym2>& omega, const Mesh& mesh, const DofMap& dofs);

struct InclusionCheck {
  /// Most negative (tau - sigma, omega)_Q / ((|tau|_Q + |sigma|_Q) |omega|_Q), 0 if none.
  double min_value = 0.0;
  std::size_t samples = 0;
};

/// Normal-cone test of omega at sigma against admissible stresses `taus`.
/// Throws NoAdmissibleSamples when `taus` is empty.
InclusionCheck check_inclusion(const std::vector<Sym2>& omega, const std::vector<Sym2>& sigma, const Mesh& mesh,
                               std::span<const std::vector<Sym2>> taus);

/// The candidates that pass the membership test at load f within `tol`.
std::vector<std::vector<Sym2>> filter_admissible(std::span<const std::vector<Sym2>> candidates, const Vector& f,
                                                 const Mesh& mesh, const DofMap& dofs, const ContactData& contact,
                                                 const ProbeOptions& probes, double tol);

struct DualityOptions {
  int sigma_probes = 500;     // random probes for the stress of each step
  int candidate_probes = 16;  // random probes for each sampled tau
  int candidate_steps = 8;    // other steps used to build tau samples
  double tol = 1e-6;
  std::uint64_t seed = 20240607;
};

struct AdmissibilityRow {
  std::size_t index = 0;
  double t = 0.0;
  double sigma_violation = 0.0;
  double inclusion_violation = 0.0;
  double energy_residual = 0.0;
  double complementarity_max = 0.0;
  std::size_t probes = 0;
  std::size_t samples = 0;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityRow> rows;

  double worst_sigma_violation() const;
  double worst_inclusion_violation() const;
  double worst_energy_residual() const;
  double worst_complementarity() const;
  std::size_t min_probes() const;
};

AdmissibilityReport admissibility_report(const Model& model, const Trajectory& traj, const DualityOptions& opts);

/// Largest relative error over all steps of u -> sigma -> omega -> u, where the
/// stress-to-strain step inverts the constitutive law elementwise by forward
/// Volterra substitution.
double duality_roundtrip_error(const Model& model, const Trajectory& traj);

/// Data perturbation: increments of the yield limit (Pa) and of the vertical
/// load amplitude on the arc (N/m^2), the latter entering as delta*sin(t).
struct Perturbation {
  double dF = 0.0;
  double df2 = 0.0;
};

struct LipschitzSample {
  Perturbation perturbation;
  double numerator = 0.0;    // max_i |u_i - u_i'|_V
  double denominator = 0.0;  // |dF|_{L2(gamma3)} + max_i |df_i|_{V*}
  double ratio = 0.0;
};

/// Model with the yield limit and the arc load shifted by `p`.
Model perturbed_model(const Model& base, const Perturbation& p);

/// Reruns the simulation for each perturbation (in parallel on `threads`
/// workers) and measures the data-to-solution ratio against `base_run`.
std::vector<LipschitzSample> lipschitz_experiment(const Model& base, const Trajectory& base_run,
                                                  std::span<const Perturbation> perturbations,
                                                  const SolverConfig& cfg, int threads = 1);

/// Max over steps of |u_i(lambda data) - lambda u_i| / |lambda u_i| for a run
/// with yield limit and loads scaled by lambda.
double scaling_equivariance_error(const Model& base, const Trajectory& base_run, double lambda,
                                  const SolverConfig& cfg);

}  // namespace viscontact
