#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "viscontact/fem.hpp"

namespace viscontact {

/// Discrete memory term after `step_index` steps.
///
/// `memory_displacement` is m_i = k * sum_{j<=i} beta(t_i - t_j) u_j, whose
/// strain is the memory strain of the stress; `accumulated` is its Riesz
/// vector G m_i, i.e. the load-like vector of (S u)_i.
struct HistoryState {
  std::size_t step_index = 0;
  Vector memory_displacement;
  Vector accumulated;
  RelaxationKernel kernel;
  double dt = 0.0;

  static HistoryState initial(std::size_t num_dofs, const RelaxationKernel& kernel, double dt);
};

/// k * sum_{j=1}^{n} beta((eval_index - j) k) u_j over the prefix u_1..u_n,
/// evaluated at step `eval_index` (>= n). Returned as a displacement, i.e.
/// before applying G.
Vector memory_displacement(std::span<const Vector> prefix, std::size_t eval_index, const RelaxationKernel& kernel,
                           double k);

/// Riesz vector of v -> (k sum_{j<=n} B(t_n - t_j) eps(u_j), eps(v))_Q.
Vector convolve_full(std::span<const Vector> prefix, const RelaxationKernel& kernel, double k, const SparseMatrix& G);

/// Constant-kernel recursion: accumulated' = accumulated + k b G u_i.
/// Throws NonConstantKernel for sampled kernels.
HistoryState history_update(const HistoryState& state, const Vector& u_i, const SparseMatrix& G);

/// Forward operator of a discrete Volterra system:
/// g_n = A u_n + k sum_{j<=n} beta((n-j)k) u_j.
std::vector<Vector> volterra_apply(const Eigen::MatrixXd& A, const RelaxationKernel& kernel,
                                   std::span<const Vector> u, double k);

/// Inverse of `volterra_apply` by forward substitution:
/// (A + k beta(0)) u_n = g_n - k sum_{j<n} beta((n-j)k) u_j.
std::vector<Vector> volterra_resolve(const Eigen::MatrixXd& A, const RelaxationKernel& kernel,
                                     std::span<const Vector> g, double k);

}  // namespace viscontact
