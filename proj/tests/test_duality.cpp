#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "viscontact/duality.hpp"
#include "viscontact/errors.hpp"

using namespace viscontact;

namespace {

struct Run {
  Model model;
  Trajectory traj;
};

SolverConfig short_config() {
  SolverConfig cfg;
  cfg.n_steps = 20;
  return cfg;
}

const Run& visco_run() {
  static const Run run = [] {
    Run r{testing::small_model(1e4, 40.0), {}};
    r.traj = run_simulation(r.model, short_config());
    return r;
  }();
  return run;
}

ProbeOptions probes_with(const Vector& extra, int n_random = 500) {
  ProbeOptions p;
  p.n_random = n_random;
  p.extra = {extra};
  return p;
}

}  // namespace

TEST_CASE("zero stress is admissible for zero load") {
  const Model model = testing::small_model(0.0, 0.0);
  const std::vector<Sym2> zero(model.mesh.num_triangles());
  const Vector f = Vector::Zero(static_cast<Eigen::Index>(model.num_dofs()));
  const SigmaCheck c = check_sigma_admissible(zero, f, model.mesh, model.dofs, model.contact, ProbeOptions{});
  CHECK(c.min_value == 0.0);
  CHECK(c.probes >= 500 + 2 * model.num_dofs());
  CHECK(c.admissible(0.0));
}

TEST_CASE("converged stresses belong to the admissible set") {
  const Run& run = visco_run();
  for (const StepRecord& rec : run.traj.steps) {
    const SigmaCheck c = check_sigma_admissible(rec.stress, rec.f, run.model.mesh, run.model.dofs,
                                                run.model.contact, probes_with(rec.u));
    CHECK(c.min_value >= -1e-6);
    CHECK(c.probes >= 500);
  }
}

TEST_CASE("removing the memory stress breaks admissibility") {
  const Run& run = visco_run();
  const StepRecord& rec = run.traj.steps.back();
  auto elastic_only = strain_field(run.model.mesh, run.model.dofs, rec.u);
  for (auto& s : elastic_only) s = elasticity_apply(s, run.model.material);
  const SigmaCheck c = check_sigma_admissible(elastic_only, rec.f, run.model.mesh, run.model.dofs,
                                              run.model.contact, probes_with(rec.u));
  CHECK(c.min_value < -1e-3);
}

TEST_CASE("inclusion test basics") {
  const Run& run = visco_run();
  const StepRecord& rec = run.traj.steps[5];
  const auto omega = strain_field(run.model.mesh, run.model.dofs, rec.u);
  const std::vector<std::vector<Sym2>> self{rec.stress};
  const InclusionCheck c = check_inclusion(omega, rec.stress, run.model.mesh, self);
  CHECK(c.min_value == 0.0);
  CHECK(c.samples == 1);
  CHECK_THROWS_AS(check_inclusion(omega, rec.stress, run.model.mesh, std::span<const std::vector<Sym2>>{}),
                  NoAdmissibleSamples);
}

TEST_CASE("sampler keeps admissible stresses and rejects an unbalanced one") {
  const Run& run = visco_run();
  const StepRecord& rec = run.traj.steps[3];
  std::vector<Sym2> crushed = rec.stress;
  for (std::size_t t = 0; t < crushed.size(); ++t) crushed[t].yy -= 1e3;
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  std::vector<Sym2> noise(rec.stress.size());
  for (auto& s : noise) s = {normal(rng), normal(rng), normal(rng)};

  const std::vector<std::vector<Sym2>> candidates{rec.stress, crushed, noise};
  ProbeOptions probes;
  probes.n_random = 16;
  const auto kept = filter_admissible(candidates, rec.f, run.model.mesh, run.model.dofs, run.model.contact, probes,
                                      1e-6);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0][0].yy == rec.stress[0].yy);
}

TEST_CASE("inclusion against admissible samples from other separation steps") {
  const Run& run = visco_run();
  const Model& m = run.model;
  const StrainRecovery recovery(m.mesh, m.dofs);
  const std::size_t i = 5;  // t = 1.25, separated
  const StepRecord& rec = run.traj.steps[i];
  for (double un : normal_displacements(rec.u, m.contact)) REQUIRE(un < 0.0);
  const auto omega = strain_field(m.mesh, m.dofs, rec.u);
  const auto lift_i = recovery.lifted_strain(rec.f);
  std::vector<std::vector<Sym2>> candidates;
  for (std::size_t j : {2u, 3u, 4u, 6u}) {
    const auto lift_j = recovery.lifted_strain(run.traj.steps[j].f);
    std::vector<Sym2> tau(omega.size());
    for (std::size_t t = 0; t < tau.size(); ++t) tau[t] = (run.traj.steps[j].stress[t] - lift_j[t]) + lift_i[t];
    candidates.push_back(tau);
  }
  const auto kept = filter_admissible(candidates, rec.f, m.mesh, m.dofs, m.contact, probes_with(rec.u, 16), 1e-6);
  REQUIRE(!kept.empty());
  CHECK(check_inclusion(omega, rec.stress, m.mesh, kept).min_value >= -1e-6);
}

TEST_CASE("strain recovery") {
  const Model model = testing::small_model(0.0);
  const StrainRecovery recovery(model.mesh, model.dofs);
  const std::vector<Sym2> zero(model.mesh.num_triangles());
  CHECK(recovery.displacement(zero).norm() == 0.0);

  std::mt19937_64 rng(33);
  const Vector u = testing::random_vector(model.num_dofs(), rng);
  const Vector back = recovery.displacement(strain_field(model.mesh, model.dofs, u));
  CHECK((back - u).norm() <= 1e-9 * u.norm());
  CHECK((strain_to_displacement(strain_field(model.mesh, model.dofs, u), model.mesh, model.dofs) - u).norm() <=
        1e-9 * u.norm());

  std::normal_distribution<double> normal;
  std::vector<Sym2> incompatible(model.mesh.num_triangles());
  for (auto& s : incompatible) s = {normal(rng), normal(rng), normal(rng)};
  const Vector p = recovery.displacement(incompatible);
  const Vector pp = recovery.displacement(strain_field(model.mesh, model.dofs, p));
  CHECK((pp - p).norm() <= 1e-9 * p.norm());

  const Vector f = testing::random_vector(model.num_dofs(), rng);
  CHECK((model.G * recovery.lift(f) - f).norm() <= 1e-9 * f.norm());
}

TEST_CASE("admissibility report and roundtrip on a short run") {
  const Run& run = visco_run();
  const AdmissibilityReport report = admissibility_report(run.model, run.traj, DualityOptions{});
  REQUIRE(report.rows.size() == run.traj.steps.size());
  CHECK(report.worst_sigma_violation() >= -1e-6);
  CHECK(report.worst_inclusion_violation() >= -1e-6);
  CHECK(report.worst_energy_residual() <= 1e-7);
  CHECK(report.worst_complementarity() <= 1e-2 * 10.0);
  CHECK(report.min_probes() >= 500);
  for (const auto& row : report.rows) CHECK(row.samples > 0);
  CHECK(duality_roundtrip_error(run.model, run.traj) <= 1e-8);
}

TEST_CASE("Lipschitz experiment") {
  const Model base = testing::small_model(0.0, 40.0);
  const SolverConfig cfg = short_config();
  const Trajectory base_run = run_simulation(base, cfg);
  const std::vector<Perturbation> perturbations{{0.0, 0.0}, {1.0, 0.0}, {0.1, 0.0}, {0.0, 0.4}};
  const auto samples = lipschitz_experiment(base, base_run, perturbations, cfg, 2);
  REQUIRE(samples.size() == 4);
  CHECK(samples[0].numerator == 0.0);
  for (std::size_t s = 1; s < samples.size(); ++s) {
    CHECK(samples[s].numerator > 0.0);
    CHECK(std::isfinite(samples[s].ratio));
  }
  const double r = samples[2].ratio / samples[1].ratio;
  CHECK(r >= 0.2);
  CHECK(r <= 5.0);

  const Model shifted = perturbed_model(base, {1.0, 0.0});
  for (std::size_t p = 0; p < shifted.contact.size(); ++p) CHECK(shifted.contact.yield_limit[p] == 11.0);
}

TEST_CASE("positive homogeneity of the elastic problem") {
  const Model base = testing::small_model(0.0, 40.0);
  const SolverConfig cfg = short_config();
  const Trajectory base_run = run_simulation(base, cfg);
  CHECK(scaling_equivariance_error(base, base_run, 2.0, cfg) <= 1e-8);
}
