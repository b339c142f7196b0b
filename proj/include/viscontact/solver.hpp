#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "viscontact/contact.hpp"
#include "viscontact/fem.hpp"
#include "viscontact/history.hpp"

namespace viscontact {

struct SolverConfig {
  double T_end = 5.0;
  int n_steps = 100;
  /// Relative fixed-point residual at which the inner optimizer stops.
  double opt_tol = 1e-14;
  std::size_t max_inner_iters = 20000;
  /// Forced momentum restart every this many iterations (0 disables).
  int restart_period = 0;
  /// Run the optimizer in the Jacobi metric of the step matrix.
  bool diagonal_scaling = true;
  /// Random probes per step for the variational-inequality certificate.
  int vi_probes = 500;
  std::uint64_t seed = 20240607;

  double dt() const { return T_end / n_steps; }
  void validate() const;
};

/// Everything assembled once per run.
struct Model {
  Mesh mesh;
  DofMap dofs;
  MaterialModel material;
  LoadSpec loads;
  ContactData contact;
  SparseMatrix K;
  SparseMatrix G;

  std::size_t num_dofs() const { return dofs.num_dofs; }
};

Model build_model(Mesh mesh, const MaterialModel& material, LoadSpec loads, double yield_limit,
                  AssemblyOptions opts = {});

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration, stopped at `rel_tol` relative change of the Rayleigh quotient.
double power_iteration(const SparseMatrix& A, double rel_tol = 1e-6, std::size_t max_iters = 20000);

/// The per-step quadratic K + k beta(0) G together with its optimizer metric.
class StepSystem {
 public:
  StepSystem(const SparseMatrix& K, const SparseMatrix& G, double self_weight, const ContactData& contact,
             bool diagonal_scaling = true);

  const SparseMatrix& matrix() const { return matrix_; }
  const ContactData& contact() const { return *contact_; }
  const Vector& metric() const { return metric_; }
  /// Step size 1/lambda_max of the metric-scaled matrix (with a 2% margin).
  double step() const { return step_; }

 private:
  SparseMatrix matrix_;
  const ContactData* contact_;
  Vector metric_;
  double step_ = 0.0;
};

/// L_i(w) = 1/2 w^T (K + k b G) w + j(w) + (H_prev - f_i)^T w.
double cost_value(const Vector& w, const StepSystem& sys, const Vector& H_prev, const Vector& f);

struct StepResult {
  Vector u;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  double residual = 0.0;         // fixed-point residual, relative
  std::vector<double> objective;  // accepted objective values (when requested)
};

/// Minimizes L_i by accelerated proximal gradient with monotone restarts,
/// warm-started from `warm_start`. Throws NoConvergence.
StepResult minimize_step(const StepSystem& sys, const Vector& H_prev, const Vector& f, const Vector& warm_start,
                         const SolverConfig& cfg, bool record_objective = false);

struct ViCheck {
  double min_value = 0.0;  // most negative normalized value, 0 if none
  double scale = 0.0;
  std::size_t probes = 0;
};

/// Evaluates the discrete variational inequality at probe vectors v:
/// (M u + H_prev - f)^T (v - u) + j(v) - j(u), each divided by |v - u|.
/// Probes: Gaussian vectors, u +/- unit steps on contact DOFs, 0 and 2u.
ViCheck verify_vi(const Vector& u, const StepSystem& sys, const Vector& H_prev, const Vector& f, int n_probes,
                  std::uint64_t seed);

/// Relative residual of u^T (M u + H_prev) + j(u) - f^T u.
double energy_residual(const Vector& u, const StepSystem& sys, const Vector& H_prev, const Vector& f);

struct StepDiagnostics {
  std::size_t iterations = 0;
  double fixed_point_residual = 0.0;
  double vi_violation = 0.0;  // normalized; >= -tol when certified
  double energy_residual = 0.0;
  double complementarity_max = 0.0;
};

struct StepRecord {
  std::size_t index = 0;  // 1-based
  double t = 0.0;
  Vector u;
  Vector f;
  Vector H_prev;
  Vector memory_displacement;  // k sum_{j<=i} beta(t_i - t_j) u_j
  Vector residual;              // internal force minus load
  std::vector<Sym2> stress;
  NodalTraction traction;
  StepDiagnostics diag;
};

struct Trajectory {
  double dt = 0.0;
  double self_weight = 0.0;  // k beta(0)
  std::vector<StepRecord> steps;
};

Trajectory run_simulation(const Model& model, const SolverConfig& cfg);

/// First time after an initial separation at which every contact node has
/// u_nu >= -tol_gap.
std::optional<double> contact_onset_time(const Trajectory& traj, const ContactData& contact,
                                         double tol_gap = kTolGap);

}  // namespace viscontact
