#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "viscontact/errors.hpp"
#include "viscontact/solver.hpp"

using namespace viscontact;

namespace {

SparseMatrix scalar_matrix(double a) {
  SparseMatrix m(1, 1);
  m.insert(0, 0) = a;
  return m;
}

/// One DOF in contact: v_nu = v, alpha = alpha_F.
ContactData scalar_contact(double alpha_F) {
  ContactData c;
  c.nodes = {0};
  c.weights = {1.0};
  c.yield_limit = {alpha_F};
  c.normal_dof = {0};
  c.normal_sign = {1.0};
  c.tangent_dof = {0};
  return c;
}

/// Grid minimizer of a x^2 / 2 + alpha_F x^+ - f x on [lo, hi].
double grid_minimizer(double a, double alpha_F, double f, double lo, double hi, double h) {
  double best = lo, best_val = INFINITY;
  const auto n = static_cast<long>(std::llround((hi - lo) / h));
  for (long i = 0; i <= n; ++i) {
    const double x = lo + static_cast<double>(i) * h;
    const double val = 0.5 * a * x * x + alpha_F * std::max(x, 0.0) - f * x;
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dt() == doctest::Approx(0.05));
  cfg.n_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.opt_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("power iteration matches a dense eigensolve") {
  const Model model = testing::small_model(1e4);
  const double lmax = power_iteration(model.K, 1e-10);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(model.K)};
  CHECK(lmax == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-6));
  CHECK(power_iteration(SparseMatrix(0, 0)) == 0.0);
}

TEST_CASE("step system") {
  const Model model = testing::small_model(1e4);
  const double self_weight = 0.05 * 1e4;
  const StepSystem plain(model.K, model.G, self_weight, model.contact, false);
  const Eigen::MatrixXd M = Eigen::MatrixXd(model.K) + self_weight * Eigen::MatrixXd(model.G);
  CHECK((Eigen::MatrixXd(plain.matrix()) - M).norm() <= 1e-12 * M.norm());
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().maxCoeff();
  CHECK(plain.step() <= 1.0 / lmax);
  CHECK(plain.step() >= 0.9 / lmax);

  const StepSystem scaled(model.K, model.G, self_weight, model.contact, true);
  const Vector d = scaled.metric();
  CHECK((d - M.diagonal()).norm() <= 1e-12 * d.norm());
  const Eigen::MatrixXd S = d.cwiseSqrt().cwiseInverse().asDiagonal() * M * d.cwiseSqrt().cwiseInverse().asDiagonal();
  const double smax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues().maxCoeff();
  CHECK(scaled.step() <= 1.0 / smax);
}

TEST_CASE("cost value") {
  const Model model = testing::small_model(1e4);
  const double self_weight = 0.05 * 1e4;
  const StepSystem sys(model.K, model.G, self_weight, model.contact);
  const std::size_t n = model.num_dofs();
  std::mt19937_64 rng(21);
  const Vector H = testing::random_vector(n, rng);
  const Vector f = testing::random_vector(n, rng);
  CHECK(cost_value(Vector::Zero(static_cast<Eigen::Index>(n)), sys, H, f) == 0.0);

  const Eigen::MatrixXd M = Eigen::MatrixXd(sys.matrix());
  const double mmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff();
  REQUIRE(mmin > 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector w = testing::random_vector(n, rng, 1e-3);
    const double bound = 0.5 * mmin * w.squaredNorm() - (H - f).norm() * w.norm();
    CHECK(cost_value(w, sys, H, f) >= bound - 1e-12 * std::abs(bound));
    const double direct = 0.5 * w.dot(M * w) + eval_j(w, model.contact) + (H - f).dot(w);
    CHECK(cost_value(w, sys, H, f) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("one-DOF analytic instance") {
  const SparseMatrix K = scalar_matrix(2.0);
  const SparseMatrix G = scalar_matrix(1.0);
  const ContactData contact = scalar_contact(1.0);
  const StepSystem sys(K, G, 0.0, contact);
  SolverConfig cfg;
  const Vector zero = Vector::Zero(1);
  auto solve = [&](double f) { return minimize_step(sys, zero, Vector::Constant(1, f), zero, cfg).u[0]; };

  CHECK(solve(3.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(solve(0.5)) <= 1e-14);
  CHECK(std::abs(solve(1.0)) <= 1e-14);
  CHECK(std::abs(solve(0.0)) <= 1e-14);
  CHECK(solve(-1.0) == doctest::Approx(-0.5).epsilon(1e-12));
  for (double f : {3.0, 0.5, 0.0, 1.0, -1.0, 2.2}) {
    const double grid = grid_minimizer(2.0, 1.0, f, -2.0, 2.0, 1e-6);
    CHECK(std::abs(solve(f) - grid) <= 1e-6);
  }
}

TEST_CASE("zero data gives the zero minimizer") {
  const Model model = testing::small_model(1e4, 0.0);
  const StepSystem sys(model.K, model.G, 500.0, model.contact);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(model.num_dofs()));
  const StepResult r = minimize_step(sys, zero, zero, zero, SolverConfig{});
  CHECK(r.u.norm() == 0.0);
}

TEST_CASE("separation regime reduces to a linear solve") {
  const Model model = testing::small_model(1e4, 10.0);
  const double self_weight = 0.05 * 1e4;
  const StepSystem sys(model.K, model.G, self_weight, model.contact);
  const Vector f = assemble_load(model.mesh, model.dofs, model.loads, 1.0);
  std::mt19937_64 rng(22);
  const Vector H = 1e-3 * f.norm() * testing::random_vector(model.num_dofs(), rng) / std::sqrt(double(f.size()));
  const Vector zero = Vector::Zero(f.size());
  const StepResult r = minimize_step(sys, H, f, zero, SolverConfig{}, true);

  const Eigen::SimplicialLDLT<SparseMatrix> direct(sys.matrix());
  const Vector ref = direct.solve(f - H);
  for (double un : normal_displacements(ref, model.contact)) REQUIRE(un < 0.0);
  CHECK((r.u - ref).norm() <= 1e-7 * ref.norm());

  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    CHECK(r.objective[i] <= r.objective[i - 1] + 1e-12 * std::abs(r.objective[i - 1]));
  }
}

TEST_CASE("contact regime satisfies the optimality certificates") {
  const Model model = testing::small_model(1e4, -40.0);
  const StepSystem sys(model.K, model.G, 500.0, model.contact);
  const Vector f = assemble_load(model.mesh, model.dofs, model.loads, 1.0);
  const Vector zero = Vector::Zero(f.size());
  const StepResult r = minimize_step(sys, zero, f, zero, SolverConfig{});
  double max_un = 0.0;
  for (double un : normal_displacements(r.u, model.contact)) max_un = std::max(max_un, un);
  CHECK(max_un > 0.0);

  const ViCheck vi = verify_vi(r.u, sys, zero, f, 500, 1);
  CHECK(vi.probes >= 500);
  CHECK(vi.min_value >= -1e-6);
  CHECK(energy_residual(r.u, sys, zero, f) <= 1e-7);

  Vector corrupted = r.u;
  corrupted[model.contact.normal_dof[model.contact.size() / 2]] += 0.1;
  CHECK(verify_vi(corrupted, sys, zero, f, 500, 1).min_value < -1e-3);
}

TEST_CASE("iteration cap raises NoConvergence with the last iterate") {
  const Model model = testing::small_model(1e4, -40.0);
  const StepSystem sys(model.K, model.G, 500.0, model.contact);
  const Vector f = assemble_load(model.mesh, model.dofs, model.loads, 1.0);
  const Vector zero = Vector::Zero(f.size());
  SolverConfig cfg;
  cfg.max_inner_iters = 3;
  try {
    minimize_step(sys, zero, f, zero, cfg);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations() == 3);
    CHECK(e.residual() > cfg.opt_tol);
    CHECK(e.last_iterate().size() == static_cast<std::size_t>(f.size()));
  }
}

TEST_CASE("simulation with zero loads stays at rest") {
  const Model model = testing::small_model(1e4, 0.0);
  SolverConfig cfg;
  cfg.n_steps = 5;
  const Trajectory traj = run_simulation(model, cfg);
  REQUIRE(traj.steps.size() == 5);
  for (const auto& rec : traj.steps) {
    CHECK(rec.u.norm() == 0.0);
    for (double s : rec.traction.normal) CHECK(s == 0.0);
  }
  CHECK_FALSE(contact_onset_time(traj, model.contact).has_value());
}

TEST_CASE("elastic simulation: stress is the elastic response and steps are certified") {
  const Model model = testing::small_model(0.0, 40.0);
  SolverConfig cfg;
  cfg.n_steps = 10;
  const Trajectory traj = run_simulation(model, cfg);
  CHECK(traj.self_weight == 0.0);
  for (const auto& rec : traj.steps) {
    const auto eps = strain_field(model.mesh, model.dofs, rec.u);
    for (std::size_t t = 0; t < eps.size(); ++t) {
      const Sym2 ref = elasticity_apply(eps[t], model.material);
      CHECK(rec.stress[t].xx == doctest::Approx(ref.xx));
      CHECK(rec.stress[t].yy == doctest::Approx(ref.yy));
    }
    CHECK(rec.diag.vi_violation >= -1e-6);
    CHECK(rec.diag.energy_residual <= 1e-7);
    CHECK(rec.diag.complementarity_max <= 1e-2 * 10.0);
    for (double st : rec.traction.tangential) CHECK(std::abs(st) <= 1e-8 * 10.0);
  }
}

TEST_CASE("viscoelastic simulation with a sampled kernel matches the constant recursion") {
  const Model constant = testing::small_model(2e3, 40.0);
  SolverConfig cfg;
  cfg.n_steps = 8;
  const Trajectory a = run_simulation(constant, cfg);
  Model sampled = constant;
  sampled.material.relaxation = RelaxationKernel::sampled(std::vector<double>(8, 2e3));
  const Trajectory b = run_simulation(sampled, cfg);
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK((a.steps[i].u - b.steps[i].u).norm() <= 1e-9 * a.steps[i].u.norm());
  }
}

TEST_CASE("contact onset time") {
  const Model model = testing::small_model(0.0, 0.0);
  Trajectory traj;
  const Vector closed = Vector::Zero(static_cast<Eigen::Index>(model.num_dofs()));
  Vector open = closed;
  open[model.contact.normal_dof[0]] = 1e-3;  // u_y > 0: separation at the first node
  const std::vector<std::pair<double, Vector>> path{{0.1, closed}, {0.2, open}, {0.3, open}, {0.4, closed}};
  for (const auto& [t, u] : path) {
    StepRecord rec;
    rec.t = t;
    rec.u = u;
    traj.steps.push_back(rec);
  }
  const auto tc = contact_onset_time(traj, model.contact);
  REQUIRE(tc.has_value());
  CHECK(*tc == 0.4);
}
