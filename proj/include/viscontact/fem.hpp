#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "viscontact/geometry.hpp"

namespace viscontact {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric 2x2 tensor stored by its three independent entries.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Sym2& operator+=(const Sym2& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  friend Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
  friend Sym2 operator-(const Sym2& a, const Sym2& b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
  friend Sym2 operator*(double s, const Sym2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }
  double trace() const { return xx + yy; }
};

/// Full contraction a : b.
inline double contract(const Sym2& a, const Sym2& b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }

/// Relaxation kernel acting as a scalar multiple of the identity tensor,
/// B(t) w = beta(t) w. Either constant in time or sampled on the time grid
/// at lags 0, k, 2k, ...
class RelaxationKernel {
 public:
  RelaxationKernel() = default;
  static RelaxationKernel constant(double b);
  static RelaxationKernel sampled(std::vector<double> lag_values);
  /// Samples `beta` at lags 0, k, ..., (count-1)k.
  static RelaxationKernel from_function(const std::function<double(double)>& beta, double k, std::size_t count);

  bool is_constant() const { return constant_; }
  /// beta at lag `m` time steps.
  double at_lag(std::size_t m) const;
  std::size_t num_samples() const { return constant_ ? 0 : samples_.size(); }

 private:
  bool constant_ = true;
  double value_ = 0.0;
  std::vector<double> samples_;
};

struct MaterialModel {
  double young_E = 1e4;
  double poisson_kappa = 0.4;
  RelaxationKernel relaxation = RelaxationKernel::constant(1e4);

  /// Throws SingularMaterial unless E > 0 and 0 < kappa < 1/2.
  void validate() const;
  double lame_lambda() const;
  /// Shear factor E/(1+kappa); also the coercivity constant m_A.
  double shear_factor() const;
  double coercivity() const { return shear_factor(); }
};

/// Plane-strain isotropic elasticity tensor applied to a strain.
Sym2 elasticity_apply(const Sym2& omega, const MaterialModel& material);

/// Elasticity tensor as a 3x3 matrix on (xx, yy, xy) components.
Eigen::Matrix3d elasticity_matrix(const MaterialModel& material);

struct LoadSpec {
  std::function<Point2(Point2, double)> body_force;  // N/m^3, may be empty
  std::function<Point2(Point2, double)> traction;    // N/m^2 on traction edges, may be empty
  /// Restrict the traction to edges lying on the load arc.
  bool traction_on_load_arc_only = true;
};

/// Vertical traction amplitude*sin(t) on the load arc, no body force.
LoadSpec sinusoidal_arc_load(double amplitude);

struct ContactData {
  std::vector<int> nodes;            // mesh node ids on gamma3, ascending x
  std::vector<double> weights;       // lumped lengths, m
  std::vector<double> yield_limit;   // F at each node, Pa
  std::vector<int> normal_dof;       // DOF carrying the normal component
  std::vector<double> normal_sign;   // v_nu = sign * v[normal_dof]
  std::vector<int> tangent_dof;      // remaining in-plane component

  std::size_t size() const { return nodes.size(); }
  double alpha(std::size_t p) const { return weights[p] * yield_limit[p]; }
  double total_weight() const;
};

/// Lumped normal trace on gamma3 with a uniform yield limit.
ContactData contact_trace(const Mesh& mesh, const DofMap& dofs, double yield_limit = 10.0);

/// Per-triangle P1 shape-function gradients.
struct ElementGeometry {
  double area = 0.0;
  std::array<double, 3> dndx{};
  std::array<double, 3> dndy{};
};

std::vector<ElementGeometry> element_geometry(const Mesh& mesh);

/// Element-constant strain of a DOF vector (clamped nodes contribute zero).
std::vector<Sym2> strain_field(const Mesh& mesh, const DofMap& dofs, const Vector& u);

/// Riesz vector of v -> sum_T area_T tau_T : eps(v)|_T.
Vector internal_force(const Mesh& mesh, const DofMap& dofs, const std::vector<Sym2>& tau);

/// Weighted L2(Omega) inner product of two element-constant fields.
double q_inner(const Mesh& mesh, const std::vector<Sym2>& a, const std::vector<Sym2>& b);

/// Number of worker threads used by assembly. Results do not depend on it.
struct AssemblyOptions {
  int threads = 1;
};

/// Stiffness matrix of the elasticity tensor on the free DOFs.
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const MaterialModel& material,
                                AssemblyOptions opts = {});

/// Stiffness matrix of the identity tensor: v^T G v = ||eps(v)||_Q^2.
SparseMatrix assemble_strain_gram(const Mesh& mesh, const DofMap& dofs, AssemblyOptions opts = {});

/// Stiffness matrix for an arbitrary pointwise tensor action.
SparseMatrix assemble_tensor(const Mesh& mesh, const DofMap& dofs, const std::function<Sym2(const Sym2&)>& tensor,
                             AssemblyOptions opts = {});

/// Consistent P1 load vector: vertex quadrature for body forces, trapezoid
/// rule per traction edge.
Vector assemble_load(const Mesh& mesh, const DofMap& dofs, const LoadSpec& loads, double t);

struct HistoryState;

/// Element stresses A eps(u_i) + memory strain. `step_index` is the index i of
/// `u` in its trajectory; the history must have absorbed exactly i steps.
std::vector<Sym2> reconstruct_stress_field(const Vector& u, std::size_t step_index, const HistoryState& history,
                                           const Mesh& mesh, const DofMap& dofs, const MaterialModel& material);

/// Thread count from VISCONTACT_THREADS, defaulting to 1.
int threads_from_env();

}  // namespace viscontact
