#include "viscontact/history.hpp"

#include <Eigen/Cholesky>

#include "viscontact/errors.hpp"

namespace viscontact {

HistoryState HistoryState::initial(std::size_t num_dofs, const RelaxationKernel& kernel, double dt) {
  HistoryState s;
  s.step_index = 0;
  s.memory_displacement = Vector::Zero(static_cast<Eigen::Index>(num_dofs));
  s.accumulated = Vector::Zero(static_cast<Eigen::Index>(num_dofs));
  s.kernel = kernel;
  s.dt = dt;
  return s;
}

Vector memory_displacement(std::span<const Vector> prefix, std::size_t eval_index, const RelaxationKernel& kernel,
                           double k) {
  if (prefix.empty()) throw Error("memory_displacement: empty prefix");
  if (eval_index < prefix.size()) throw Error("memory_displacement: evaluation before the end of the prefix");
  Vector m = Vector::Zero(prefix.front().size());
  for (std::size_t j = 1; j <= prefix.size(); ++j) m += (k * kernel.at_lag(eval_index - j)) * prefix[j - 1];
  return m;
}

Vector convolve_full(std::span<const Vector> prefix, const RelaxationKernel& kernel, double k, const SparseMatrix& G) {
  return G * memory_displacement(prefix, prefix.size(), kernel, k);
}

HistoryState history_update(const HistoryState& state, const Vector& u_i, const SparseMatrix& G) {
  if (!state.kernel.is_constant()) {
    throw NonConstantKernel("history_update: recursion needs a constant kernel, use convolve_full");
  }
  HistoryState next = state;
  const Vector increment = (state.dt * state.kernel.at_lag(0)) * u_i;
  next.memory_displacement += increment;
  next.accumulated += G * increment;
  ++next.step_index;
  return next;
}

std::vector<Vector> volterra_apply(const Eigen::MatrixXd& A, const RelaxationKernel& kernel,
                                   std::span<const Vector> u, double k) {
  std::vector<Vector> g;
  g.reserve(u.size());
  for (std::size_t n = 1; n <= u.size(); ++n) {
    Vector gn = A * u[n - 1];
    for (std::size_t j = 1; j <= n; ++j) gn += (k * kernel.at_lag(n - j)) * u[j - 1];
    g.push_back(std::move(gn));
  }
  return g;
}

std::vector<Vector> volterra_resolve(const Eigen::MatrixXd& A, const RelaxationKernel& kernel,
                                     std::span<const Vector> g, double k) {
  if (g.empty()) throw Error("volterra_resolve: empty series");
  Eigen::MatrixXd step = A;
  step.diagonal().array() += k * kernel.at_lag(0);
  const Eigen::LDLT<Eigen::MatrixXd> solver(step);
  if (solver.info() != Eigen::Success || !solver.isPositive() ||
      (solver.vectorD().array().abs() <= 1e-300).any()) {
    throw SingularStep("volterra_resolve: step matrix is singular");
  }
  std::vector<Vector> u;
  u.reserve(g.size());
  for (std::size_t n = 1; n <= g.size(); ++n) {
    Vector rhs = g[n - 1];
    for (std::size_t j = 1; j < n; ++j) rhs -= (k * kernel.at_lag(n - j)) * u[j - 1];
    u.push_back(solver.solve(rhs));
  }
  return u;
}

}  // namespace viscontact
