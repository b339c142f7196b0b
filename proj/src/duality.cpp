#include "viscontact/duality.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include "viscontact/errors.hpp"

namespace viscontact {

namespace {

double alpha_norm(const ContactData& contact) {
  double s = 0.0;
  for (std::size_t p = 0; p < contact.size(); ++p) s += contact.alpha(p) * contact.alpha(p);
  return std::sqrt(s);
}

double q_norm(const Mesh& mesh, const std::vector<Sym2>& a) { return std::sqrt(std::max(q_inner(mesh, a, a), 0.0)); }

std::vector<Sym2> combine(double a, const std::vector<Sym2>& x, double b, const std::vector<Sym2>& y) {
  std::vector<Sym2> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = a * x[t] + b * y[t];
  return out;
}

}  // namespace

SigmaCheck check_force_admissible(const Vector& q, const Vector& f, const ContactData& contact,
                                  const ProbeOptions& probes) {
  if (q.size() != f.size()) throw InvalidSizes("check_force_admissible: size mismatch");
  const Vector r = q - f;
  SigmaCheck check;
  check.scale = q.norm() + f.norm() + alpha_norm(contact);
  const double scale = check.scale > 0.0 ? check.scale : 1.0;

  auto record = [&](double value, double len) {
    check.min_value = std::min(check.min_value, value / (len * scale));
    ++check.probes;
  };
  auto probe = [&](const Vector& v) {
    const double len = v.norm();
    if (len == 0.0) return;
    record(r.dot(v) + eval_j(v, contact), len);
  };

  std::mt19937_64 rng(probes.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(q.size());
  for (int k = 0; k < probes.n_random; ++k) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    probe(v);
  }
  if (probes.coordinate) {
    std::vector<double> alpha_at(static_cast<std::size_t>(q.size()), 0.0);
    std::vector<double> sign_at(static_cast<std::size_t>(q.size()), 0.0);
    for (std::size_t p = 0; p < contact.size(); ++p) {
      alpha_at[static_cast<std::size_t>(contact.normal_dof[p])] = contact.alpha(p);
      sign_at[static_cast<std::size_t>(contact.normal_dof[p])] = contact.normal_sign[p];
    }
    for (Eigen::Index d = 0; d < q.size(); ++d) {
      for (double s : {-1.0, 1.0}) {
        const double vn = s * sign_at[static_cast<std::size_t>(d)];
        record(s * r[d] + alpha_at[static_cast<std::size_t>(d)] * std::max(vn, 0.0), 1.0);
      }
    }
  }
  for (const Vector& e : probes.extra) {
    probe(e);
    probe(-e);
  }
  return check;
}

SigmaCheck check_sigma_admissible(const std::vector<Sym2>& sigma, const Vector& f, const Mesh& mesh,
                                  const DofMap& dofs, const ContactData& contact, const ProbeOptions& probes) {
  if (sigma.size() != mesh.num_triangles()) throw InvalidSizes("check_sigma_admissible: one stress per triangle");
  return check_force_admissible(internal_force(mesh, dofs, sigma), f, contact, probes);
}

StrainRecovery::StrainRecovery(const Mesh& mesh, const DofMap& dofs)
    : mesh_(&mesh), dofs_(&dofs), factor_(assemble_strain_gram(mesh, dofs)) {
  if (factor_.info() != Eigen::Success) throw SingularStep("StrainRecovery: strain Gram matrix is singular");
}

Vector StrainRecovery::displacement(const std::vector<Sym2>& omega) const {
  if (omega.size() != mesh_->num_triangles()) throw InvalidSizes("StrainRecovery: one strain per triangle");
  return factor_.solve(internal_force(*mesh_, *dofs_, omega));
}

Vector StrainRecovery::lift(const Vector& f) const {
  if (static_cast<std::size_t>(f.size()) != dofs_->num_dofs) throw InvalidSizes("StrainRecovery: load size");
  return factor_.solve(f);
}

std::vector<Sym2> StrainRecovery::lifted_strain(const Vector& f) const {
  return strain_field(*mesh_, *dofs_, lift(f));
}

Vector strain_to_displacement(const std::vector<Sym2>& omega, const Mesh& mesh, const DofMap& dofs) {
  return StrainRecovery(mesh, dofs).displacement(omega);
}

InclusionCheck check_inclusion(const std::vector<Sym2>& omega, const std::vector<Sym2>& sigma, const Mesh& mesh,
                               std::span<const std::vector<Sym2>> taus) {
  if (taus.empty()) throw NoAdmissibleSamples("check_inclusion: no admissible stress samples");
  if (omega.size() != mesh.num_triangles() || sigma.size() != mesh.num_triangles()) {
    throw InvalidSizes("check_inclusion: one value per triangle");
  }
  InclusionCheck check;
  const double omega_norm = q_norm(mesh, omega);
  const double sigma_norm = q_norm(mesh, sigma);
  for (const auto& tau : taus) {
    if (tau.size() != sigma.size()) throw InvalidSizes("check_inclusion: one value per triangle");
    ++check.samples;
    const double denom = (q_norm(mesh, tau) + sigma_norm) * omega_norm;
    if (denom == 0.0) continue;
    const double value = q_inner(mesh, combine(1.0, tau, -1.0, sigma), omega);
    check.min_value = std::min(check.min_value, value / denom);
  }
  return check;
}

std::vector<std::vector<Sym2>> filter_admissible(std::span<const std::vector<Sym2>> candidates, const Vector& f,
                                                 const Mesh& mesh, const DofMap& dofs, const ContactData& contact,
                                                 const ProbeOptions& probes, double tol) {
  std::vector<std::vector<Sym2>> out;
  for (const auto& tau : candidates) {
    if (check_sigma_admissible(tau, f, mesh, dofs, contact, probes).admissible(tol)) out.push_back(tau);
  }
  return out;
}

double AdmissibilityReport::worst_sigma_violation() const {
  double v = 0.0;
  for (const auto& r : rows) v = std::min(v, r.sigma_violation);
  return v;
}

double AdmissibilityReport::worst_inclusion_violation() const {
  double v = 0.0;
  for (const auto& r : rows) v = std::min(v, r.inclusion_violation);
  return v;
}

double AdmissibilityReport::worst_energy_residual() const {
  double v = 0.0;
  for (const auto& r : rows) v = std::max(v, r.energy_residual);
  return v;
}

double AdmissibilityReport::worst_complementarity() const {
  double v = 0.0;
  for (const auto& r : rows) v = std::max(v, r.complementarity_max);
  return v;
}

std::size_t AdmissibilityReport::min_probes() const {
  if (rows.empty()) return 0;
  std::size_t v = rows.front().probes;
  for (const auto& r : rows) v = std::min(v, r.probes);
  return v;
}

AdmissibilityReport admissibility_report(const Model& model, const Trajectory& traj, const DualityOptions& opts) {
  const Mesh& mesh = model.mesh;
  const StrainRecovery recovery(mesh, model.dofs);
  const std::size_t n = traj.steps.size();

  std::vector<std::vector<Sym2>> shifted(n);  // sigma_j - eps(G^{-1} f_j), an element of the load-free set
  std::vector<std::vector<Sym2>> lifted(n);   // eps(G^{-1} f_j)
  for (std::size_t j = 0; j < n; ++j) {
    lifted[j] = recovery.lifted_strain(traj.steps[j].f);
    shifted[j] = combine(1.0, traj.steps[j].stress, -1.0, lifted[j]);
  }

  AdmissibilityReport report;
  report.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const StepRecord& rec = traj.steps[i];
    AdmissibilityRow row;
    row.index = rec.index;
    row.t = rec.t;
    row.energy_residual = rec.diag.energy_residual;
    row.complementarity_max = rec.diag.complementarity_max;

    ProbeOptions sigma_probes;
    sigma_probes.n_random = opts.sigma_probes;
    sigma_probes.seed = opts.seed + rec.index;
    sigma_probes.extra = {rec.u};
    const SigmaCheck sc =
        check_sigma_admissible(rec.stress, rec.f, mesh, model.dofs, model.contact, sigma_probes);
    row.sigma_violation = sc.min_value;
    row.probes = sc.probes;

    std::vector<std::vector<Sym2>> candidates;
    candidates.push_back(lifted[i]);
    const std::size_t others = n > 1 ? n - 1 : 0;
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts.candidate_steps, 0)), others);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t j = (c * others) / count;
      if (j >= i) ++j;
      candidates.push_back(traj.steps[j].stress);
      for (double lambda : {0.5, 1.0, 2.0}) candidates.push_back(combine(lambda, shifted[j], 1.0, lifted[i]));
    }
    ProbeOptions tau_probes;
    tau_probes.n_random = opts.candidate_probes;
    tau_probes.seed = opts.seed + 7919 * rec.index;
    tau_probes.extra = {rec.u};
    const auto taus = filter_admissible(candidates, rec.f, mesh, model.dofs, model.contact, tau_probes, opts.tol);
    const InclusionCheck ic = check_inclusion(strain_field(mesh, model.dofs, rec.u), rec.stress, mesh, taus);
    row.inclusion_violation = ic.min_value;
    row.samples = ic.samples;
    report.rows.push_back(row);
  }
  return report;
}

double duality_roundtrip_error(const Model& model, const Trajectory& traj) {
  const Mesh& mesh = model.mesh;
  const std::size_t n = traj.steps.size();
  if (n == 0) return 0.0;
  const Eigen::Matrix3d A = elasticity_matrix(model.material);
  const std::size_t ne = mesh.num_triangles();

  std::vector<std::vector<Sym2>> omega(n, std::vector<Sym2>(ne));
  std::vector<Vector> series(n, Vector(3));
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t i = 0; i < n; ++i) {
      const Sym2& s = traj.steps[i].stress[e];
      series[i] << s.xx, s.yy, s.xy;
    }
    const auto w = volterra_resolve(A, model.material.relaxation, series, traj.dt);
    for (std::size_t i = 0; i < n; ++i) omega[i][e] = Sym2{w[i][0], w[i][2], w[i][1]};
  }

  const StrainRecovery recovery(mesh, model.dofs);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector& u = traj.steps[i].u;
    const Vector back = recovery.displacement(omega[i]);
    const double norm = u.norm();
    const double err = (back - u).norm();
    worst = std::max(worst, norm > 0.0 ? err / norm : err);
  }
  return worst;
}

Model perturbed_model(const Model& base, const Perturbation& p) {
  Model m = base;
  for (double& F : m.contact.yield_limit) F += p.dF;
  if (p.df2 != 0.0) {
    const auto original = base.loads.traction;
    const double df2 = p.df2;
    m.loads.traction = [original, df2](Point2 x, double t) {
      Point2 v = original ? original(x, t) : Point2{};
      v.y += df2 * std::sin(t);
      return v;
    };
  }
  return m;
}

namespace {

double v_norm(const SparseMatrix& G, const Vector& v) { return std::sqrt(std::max(v.dot(G * v), 0.0)); }

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<LipschitzSample> lipschitz_experiment(const Model& base, const Trajectory& base_run,
                                                  std::span<const Perturbation> perturbations,
                                                  const SolverConfig& cfg, int threads) {
  const StrainRecovery recovery(base.mesh, base.dofs);
  std::vector<LipschitzSample> out(perturbations.size());
  parallel_for(perturbations.size(), threads, [&](std::size_t s) {
    const Perturbation& p = perturbations[s];
    const Model m = perturbed_model(base, p);
    const Trajectory run = run_simulation(m, cfg);
    LipschitzSample sample;
    sample.perturbation = p;
    double data_f = 0.0;
    for (std::size_t i = 0; i < run.steps.size() && i < base_run.steps.size(); ++i) {
      sample.numerator = std::max(sample.numerator, v_norm(base.G, run.steps[i].u - base_run.steps[i].u));
      const Vector df = run.steps[i].f - base_run.steps[i].f;
      data_f = std::max(data_f, std::sqrt(std::max(df.dot(recovery.lift(df)), 0.0)));
    }
    double data_F = 0.0;
    for (std::size_t q = 0; q < base.contact.size(); ++q) {
      const double d = m.contact.yield_limit[q] - base.contact.yield_limit[q];
      data_F += base.contact.weights[q] * d * d;
    }
    sample.denominator = std::sqrt(data_F) + data_f;
    sample.ratio = sample.denominator > 0.0 ? sample.numerator / sample.denominator : 0.0;
    out[s] = sample;
  });
  return out;
}

double scaling_equivariance_error(const Model& base, const Trajectory& base_run, double lambda,
                                  const SolverConfig& cfg) {
  Model m = base;
  for (double& F : m.contact.yield_limit) F *= lambda;
  const auto scale_field = [lambda](const std::function<Point2(Point2, double)>& fn) {
    return std::function<Point2(Point2, double)>([fn, lambda](Point2 x, double t) {
      const Point2 v = fn(x, t);
      return Point2{lambda * v.x, lambda * v.y};
    });
  };
  if (m.loads.traction) m.loads.traction = scale_field(base.loads.traction);
  if (m.loads.body_force) m.loads.body_force = scale_field(base.loads.body_force);
  const Trajectory run = run_simulation(m, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < run.steps.size() && i < base_run.steps.size(); ++i) {
    const Vector expected = lambda * base_run.steps[i].u;
    const double norm = expected.norm();
    const double err = (run.steps[i].u - expected).norm();
    worst = std::max(worst, norm > 0.0 ? err / norm : err);
  }
  return worst;
}

}  // namespace viscontact
