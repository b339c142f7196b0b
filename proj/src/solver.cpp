#include "viscontact/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "viscontact/errors.hpp"

namespace viscontact {

void SolverConfig::validate() const {
  if (!(T_end > 0.0)) throw Error("solver: T_end must be positive");
  if (n_steps < 1) throw Error("solver: n_steps must be at least 1");
  if (!(opt_tol > 0.0)) throw Error("solver: opt_tol must be positive");
  if (max_inner_iters < 1) throw Error("solver: max_inner_iters must be at least 1");
  if (restart_period < 0) throw Error("solver: restart_period must be nonnegative");
}

Model build_model(Mesh mesh, const MaterialModel& material, LoadSpec loads, double yield_limit,
                  AssemblyOptions opts) {
  material.validate();
  Model m;
  m.mesh = std::move(mesh);
  m.dofs = free_dof_map(m.mesh);
  m.material = material;
  m.loads = std::move(loads);
  m.contact = contact_trace(m.mesh, m.dofs, yield_limit);
  m.K = assemble_stiffness(m.mesh, m.dofs, material, opts);
  m.G = assemble_strain_gram(m.mesh, m.dofs, opts);
  return m;
}

double power_iteration(const SparseMatrix& A, double rel_tol, std::size_t max_iters) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 7.0 * static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vector w = A * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

StepSystem::StepSystem(const SparseMatrix& K, const SparseMatrix& G, double self_weight, const ContactData& contact,
                       bool diagonal_scaling)
    : matrix_(K + self_weight * G), contact_(&contact) {
  matrix_.makeCompressed();
  const Eigen::Index n = matrix_.rows();
  metric_ = diagonal_scaling ? Vector(matrix_.diagonal()) : Vector::Ones(n);
  if ((metric_.array() <= 0.0).any()) throw Error("StepSystem: step matrix has a nonpositive diagonal");
  const Vector inv_sqrt = metric_.array().rsqrt();
  const SparseMatrix scaled = inv_sqrt.asDiagonal() * matrix_ * inv_sqrt.asDiagonal();
  const double lambda = power_iteration(scaled, 1e-6);
  // Step 1/(1.02 lambda) on the power-iteration estimate of lambda_max.
  step_ = lambda > 0.0 ? 1.0 / (1.02 * lambda) : 1.0;
}

double cost_value(const Vector& w, const StepSystem& sys, const Vector& H_prev, const Vector& f) {
  return 0.5 * w.dot(sys.matrix() * w) + eval_j(w, sys.contact()) + (H_prev - f).dot(w);
}

namespace {

/// Proximal map of s*j in the metric diag(D).
Vector prox_in_metric(const Vector& z, double s, const Vector& D, const ContactData& contact) {
  Vector out = z;
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const int d = contact.normal_dof[p];
    const double sign = contact.normal_sign[p];
    out[d] = sign * prox_positive_part(sign * z[d], s * contact.alpha(p) / D[d]);
  }
  return out;
}

double metric_norm(const Vector& v, const Vector& D) { return std::sqrt((D.array() * v.array().square()).sum()); }

}  // namespace

StepResult minimize_step(const StepSystem& sys, const Vector& H_prev, const Vector& f, const Vector& warm_start,
                         const SolverConfig& cfg, bool record_objective) {
  const SparseMatrix& M = sys.matrix();
  const ContactData& contact = sys.contact();
  const Vector& D = sys.metric();
  const Vector inv_D = D.cwiseInverse();
  const double s = sys.step();
  const Vector g = f - H_prev;
  const double g_scale = s * std::sqrt((inv_D.array() * g.array().square()).sum());

  auto objective = [&](const Vector& x, const Vector& Mx) { return 0.5 * x.dot(Mx) - g.dot(x) + eval_j(x, contact); };
  // F(z) - F(x) evaluated without cancellation between the large quadratic and
  // linear terms, together with a bound on its rounding error.
  auto increase = [&](const Vector& z, const Vector& Mz, const Vector& x, const Vector& Mx) {
    const Vector dz = z - x;
    const double jz = eval_j(z, contact), jx = eval_j(x, contact);
    const double value = dz.dot(0.5 * (Mz + Mx) - g) + (jz - jx);
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (dz.norm() * (Mx.norm() + Mz.norm() + g.norm()) + jz + jx);
    return value - noise;
  };

  StepResult res;
  Vector x = warm_start;
  Vector Mx = M * x;
  Vector x_prev = x, Mx_prev = Mx;
  Vector y = x, My = Mx;
  double t = 1.0;
  bool just_restarted = true;
  if (record_objective) res.objective.push_back(objective(x, Mx));

  for (std::size_t it = 0;; ++it) {
    const Vector fixed_point = prox_in_metric(x - s * inv_D.cwiseProduct(Mx - g), s, D, contact);
    const double num = metric_norm(x - fixed_point, D);
    const double denom = metric_norm(x, D) + g_scale;
    res.residual = denom > 0.0 ? num / denom : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (res.residual <= cfg.opt_tol) {
      res.u = std::move(x);
      res.iterations = it;
      return res;
    }
    if (it >= cfg.max_inner_iters) {
      throw NoConvergence("minimize_step: no convergence after " + std::to_string(it) + " iterations (residual " +
                              std::to_string(res.residual) + ")",
                          it, res.residual, std::vector<double>(x.data(), x.data() + x.size()));
    }

    Vector z = prox_in_metric(y - s * inv_D.cwiseProduct(My - g), s, D, contact);
    Vector Mz = M * z;
    if (!just_restarted && increase(z, Mz, x, Mx) > 0.0) {
      t = 1.0;
      y = x;
      My = Mx;
      ++res.restarts;
      just_restarted = true;
      continue;
    }
    // The momentum points uphill when (y - z) and (z - x) align in the metric.
    const bool uphill = (D.array() * (y - z).array() * (z - x).array()).sum() > 0.0;
    just_restarted = false;
    x_prev.swap(x);
    Mx_prev.swap(Mx);
    x = std::move(z);
    Mx = std::move(Mz);
    if (record_objective) res.objective.push_back(objective(x, Mx));

    const bool periodic = cfg.restart_period > 0 && (it + 1) % static_cast<std::size_t>(cfg.restart_period) == 0;
    if (uphill || periodic) {
      t = 1.0;
      y = x;
      My = Mx;
      ++res.restarts;
      just_restarted = true;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    y = x + beta * (x - x_prev);
    My = Mx + beta * (Mx - Mx_prev);
    t = t_next;
  }
}

ViCheck verify_vi(const Vector& u, const StepSystem& sys, const Vector& H_prev, const Vector& f, int n_probes,
                  std::uint64_t seed) {
  const ContactData& contact = sys.contact();
  const Vector r = sys.matrix() * u + H_prev - f;
  Vector alpha(static_cast<Eigen::Index>(contact.size()));
  for (std::size_t p = 0; p < contact.size(); ++p) alpha[static_cast<Eigen::Index>(p)] = contact.alpha(p);

  ViCheck check;
  check.scale = f.norm() + (r + f).norm() + alpha.norm();
  const double ju = eval_j(u, contact);
  const double amp = std::max(u.lpNorm<Eigen::Infinity>(), 1e-12);

  auto probe = [&](const Vector& v) {
    const Vector d = v - u;
    const double len = d.norm();
    if (len == 0.0) return;
    const double value = r.dot(d) + eval_j(v, contact) - ju;
    const double normalized = check.scale > 0.0 ? value / (len * check.scale) : value / len;
    check.min_value = std::min(check.min_value, normalized);
    ++check.probes;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(u.size());
  for (int k = 0; k < n_probes; ++k) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = amp * normal(rng);
    probe(v);
  }
  for (std::size_t p = 0; p < contact.size(); ++p) {
    for (double sgn : {-1.0, 1.0}) {
      v = u;
      v[contact.normal_dof[p]] += sgn * amp;
      probe(v);
    }
  }
  probe(Vector::Zero(u.size()));
  probe(2.0 * u);
  return check;
}

double energy_residual(const Vector& u, const StepSystem& sys, const Vector& H_prev, const Vector& f) {
  const double quad = u.dot(sys.matrix() * u + H_prev);
  const double ju = eval_j(u, sys.contact());
  const double load = f.dot(u);
  const double denom = std::abs(quad) + ju + std::abs(load);
  return denom > 0.0 ? std::abs(quad + ju - load) / denom : 0.0;
}

Trajectory run_simulation(const Model& model, const SolverConfig& cfg) {
  cfg.validate();
  const double k = cfg.dt();
  const RelaxationKernel& kernel = model.material.relaxation;
  const std::size_t n = model.num_dofs();

  Trajectory traj;
  traj.dt = k;
  traj.self_weight = k * kernel.at_lag(0);
  const StepSystem sys(model.K, model.G, traj.self_weight, model.contact, cfg.diagonal_scaling);

  HistoryState history = HistoryState::initial(n, kernel, k);
  std::vector<Vector> us;
  us.reserve(static_cast<std::size_t>(cfg.n_steps));
  Vector warm = Vector::Zero(static_cast<Eigen::Index>(n));

  for (int i = 1; i <= cfg.n_steps; ++i) {
    StepRecord rec;
    rec.index = static_cast<std::size_t>(i);
    rec.t = k * i;
    rec.f = assemble_load(model.mesh, model.dofs, model.loads, rec.t);
    if (kernel.is_constant() || us.empty()) {
      rec.H_prev = history.accumulated;
    } else {
      rec.H_prev = model.G * memory_displacement(us, rec.index, kernel, k);
    }

    StepResult step;
    try {
      step = minimize_step(sys, rec.H_prev, rec.f, warm, cfg);
    } catch (const NoConvergence& e) {
      throw NoConvergence(std::string(e.what()) + " at step " + std::to_string(i), e.iterations(), e.residual(),
                          e.last_iterate(), i);
    }
    rec.u = std::move(step.u);
    us.push_back(rec.u);

    if (kernel.is_constant()) {
      history = history_update(history, rec.u, model.G);
    } else {
      history.memory_displacement = memory_displacement(us, rec.index, kernel, k);
      history.accumulated = model.G * history.memory_displacement;
      history.step_index = rec.index;
    }
    rec.memory_displacement = history.memory_displacement;
    rec.stress = reconstruct_stress_field(rec.u, rec.index, history, model.mesh, model.dofs, model.material);
    rec.residual = sys.matrix() * rec.u + rec.H_prev - rec.f;
    rec.traction = nodal_traction_from_residual(rec.residual, model.contact);

    rec.diag.iterations = step.iterations;
    rec.diag.fixed_point_residual = step.residual;
    rec.diag.vi_violation = verify_vi(rec.u, sys, rec.H_prev, rec.f, cfg.vi_probes, cfg.seed + rec.index).min_value;
    rec.diag.energy_residual = energy_residual(rec.u, sys, rec.H_prev, rec.f);
    const auto comp = complementarity_residual(rec.u, rec.traction.normal, model.contact);
    rec.diag.complementarity_max = comp.empty() ? 0.0 : *std::max_element(comp.begin(), comp.end());

    warm = rec.u;
    traj.steps.push_back(std::move(rec));
  }
  return traj;
}

std::optional<double> contact_onset_time(const Trajectory& traj, const ContactData& contact, double tol_gap) {
  bool separated = false;
  for (const StepRecord& rec : traj.steps) {
    const auto un = normal_displacements(rec.u, contact);
    const bool all_closed = std::all_of(un.begin(), un.end(), [tol_gap](double v) { return v >= -tol_gap; });
    if (!all_closed) {
      separated = true;
    } else if (separated) {
      return rec.t;
    }
  }
  return std::nullopt;
}

}  // namespace viscontact
