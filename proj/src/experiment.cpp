#include "viscontact/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace viscontact {

LoadSpec config_load(const RunConfig& cfg) {
  if (cfg.load_shape == LoadShape::sine) return sinusoidal_arc_load(cfg.amplitude);
  LoadSpec loads;
  const double amplitude = cfg.amplitude;
  loads.traction = [amplitude](Point2, double) { return Point2{0.0, amplitude}; };
  loads.traction_on_load_arc_only = true;
  return loads;
}

SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.T_end = cfg.T_end;
  s.n_steps = cfg.n_steps;
  s.opt_tol = cfg.opt_tol;
  s.max_inner_iters = static_cast<std::size_t>(cfg.max_inner_iters);
  s.restart_period = cfg.restart_period;
  s.diagonal_scaling = cfg.diagonal_scaling;
  s.vi_probes = cfg.vi_probes;
  s.seed = cfg.seed;
  return s;
}

Mesh config_mesh(const RunConfig& cfg) { return triangulate(build_reference_domain(), cfg.h_interior, cfg.h_contact); }

Model config_model(const RunConfig& cfg, const Mesh& mesh, double b, AssemblyOptions opts) {
  MaterialModel material;
  material.young_E = cfg.young_E;
  material.poisson_kappa = cfg.poisson_kappa;
  material.relaxation = RelaxationKernel::constant(b);
  return build_model(mesh, material, config_load(cfg), cfg.yield_F, opts);
}

RunResult execute_run(const RunConfig& cfg, const Mesh& mesh, double b, std::string name, AssemblyOptions opts) {
  const auto start = std::chrono::steady_clock::now();
  RunResult run;
  run.name = std::move(name);
  run.relaxation_b = b;
  run.model = config_model(cfg, mesh, b, opts);
  run.traj = run_simulation(run.model, solver_config(cfg));

  DualityOptions dopts;
  dopts.sigma_probes = cfg.sigma_probes;
  dopts.candidate_probes = cfg.candidate_probes;
  dopts.candidate_steps = cfg.candidate_steps;
  dopts.tol = cfg.certificate_tol;
  dopts.seed = cfg.seed;
  run.report = admissibility_report(run.model, run.traj, dopts);
  run.roundtrip_error = duality_roundtrip_error(run.model, run.traj);
  run.t_c = contact_onset_time(run.traj, run.model.contact);

  for (const StepRecord& rec : run.traj.steps) {
    for (double un : normal_displacements(rec.u, run.model.contact)) {
      run.max_penetration = std::max(run.max_penetration, un);
    }
    for (double st : rec.traction.tangential) run.max_abs_sigma_tau = std::max(run.max_abs_sigma_tau, std::abs(st));
    run.worst_vi = std::min(run.worst_vi, rec.diag.vi_violation);
  }
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

bool RunChecks::all() const {
  return vi_certified && energy_identity && sigma_membership && inclusion && roundtrip && frictionless &&
         complementarity;
}

RunChecks evaluate_checks(const RunResult& run, const RunConfig& cfg) {
  RunChecks c;
  const double F = cfg.yield_F;
  c.vi_certified = run.worst_vi >= -cfg.certificate_tol;
  c.energy_identity = run.report.worst_energy_residual() <= kEnergyTol;
  c.sigma_membership = run.report.worst_sigma_violation() >= -cfg.certificate_tol &&
                       run.report.min_probes() >= kMinSigmaProbes;
  c.inclusion = run.report.worst_inclusion_violation() >= -cfg.certificate_tol;
  c.roundtrip = run.roundtrip_error <= kRoundtripTol;
  c.frictionless = run.max_abs_sigma_tau <= kFrictionlessTol * F;
  c.complementarity = run.report.worst_complementarity() <= kComplementarityTol * F;
  return c;
}

std::size_t nearest_step(const Trajectory& traj, double t) {
  std::size_t best = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const double d = std::abs(traj.steps[i].t - t);
    if (d < gap) {
      gap = d;
      best = i;
    }
  }
  return best;
}

bool yield_saturated(const RunResult& run, double t, double rel_tol) {
  if (run.traj.steps.empty()) return false;
  const StepRecord& rec = run.traj.steps[nearest_step(run.traj, t)];
  const auto un = normal_displacements(rec.u, run.model.contact);
  for (std::size_t p = 0; p < un.size(); ++p) {
    const double F = run.model.contact.yield_limit[p];
    if (!(un[p] > kTolGap)) return false;
    if (std::abs(rec.traction.normal[p] + F) > rel_tol * F) return false;
  }
  return true;
}

bool separated(const RunResult& run, double t, double stress_tol) {
  if (run.traj.steps.empty()) return false;
  const StepRecord& rec = run.traj.steps[nearest_step(run.traj, t)];
  const auto un = normal_displacements(rec.u, run.model.contact);
  for (std::size_t p = 0; p < un.size(); ++p) {
    if (!(un[p] < 0.0)) return false;
    if (std::abs(rec.traction.normal[p]) > stress_tol) return false;
  }
  return true;
}

bool LipschitzStudy::ratios_bounded(double factor) const {
  if (spread.empty()) return false;
  return std::all_of(spread.begin(), spread.end(), [factor](double s) { return std::isfinite(s) && s <= factor; });
}

LipschitzStudy run_lipschitz_study(const RunConfig& cfg, const Mesh& mesh, const RunResult& base, int threads) {
  LipschitzStudy study;
  study.scales = cfg.lipschitz_scales;
  std::vector<Perturbation> perturbations;
  for (double s : study.scales) {
    perturbations.push_back({s * cfg.yield_F, 0.0});
    perturbations.push_back({0.0, s * cfg.amplitude});
    perturbations.push_back({s * cfg.yield_F, s * cfg.amplitude});
  }
  const SolverConfig scfg = solver_config(cfg);
  study.samples = lipschitz_experiment(base.model, base.traj, perturbations, scfg, threads);

  constexpr std::size_t kFamilies = 3;
  for (std::size_t fam = 0; fam < kFamilies; ++fam) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t s = 0; s < study.scales.size(); ++s) {
      const double r = study.samples[s * kFamilies + fam].ratio;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    study.spread.push_back(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  }

  const Model elastic = config_model(cfg, mesh, 0.0);
  const Trajectory elastic_run = run_simulation(elastic, scfg);
  study.scaling_error = scaling_equivariance_error(elastic, elastic_run, 2.0, scfg);
  return study;
}

}  // namespace viscontact
