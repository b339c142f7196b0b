#pragma once

#include <vector>

#include "viscontact/fem.hpp"

namespace viscontact {

/// Gap threshold separating genuine contact states from solver noise, m.
inline constexpr double kTolGap = 1e-8;

/// Normal displacement v_nu at every contact node.
std::vector<double> normal_displacements(const Vector& v, const ContactData& contact);

/// Lumped j(v) = sum_p weight_p F_p (v_nu(p))^+.
double eval_j(const Vector& v, const ContactData& contact);

/// One element of the subdifferential of j at v (the zero branch at kinks).
Vector subgradient_j(const Vector& v, const ContactData& contact);

/// Exact proximal map of step*j: soft threshold towards zero on the
/// penetration side of each contact normal component.
Vector prox_j(const Vector& z, double step, const ContactData& contact);

/// Scalar prox of alpha*x^+ at z.
double prox_positive_part(double z, double alpha);

/// Per-node violation of the rigid-plastic contact law:
///   u_nu < -tol_gap  => sigma_nu = 0
///   otherwise        => -F <= sigma_nu <= 0
///   u_nu >  tol_gap  => sigma_nu = -F
std::vector<double> complementarity_residual(const Vector& u, const std::vector<double>& sigma_nu,
                                             const ContactData& contact, double tol_gap = kTolGap,
                                             double tol_stress = 0.0);

struct NodalTraction {
  std::vector<double> normal;      // sigma_nu at each contact node, Pa
  std::vector<double> tangential;  // sigma_tau at each contact node, Pa
};

/// Contact tractions recovered from the equilibrium residual
/// r = (internal force) - f: the reaction at node p divided by its lumped
/// weight, split into normal and tangential parts.
NodalTraction nodal_traction_from_residual(const Vector& residual, const ContactData& contact);

/// Area-weighted average of sigma_T nu over the triangles owning the gamma3
/// edges around each contact node.
NodalTraction nodal_traction_averaged(const std::vector<Sym2>& stress, const Mesh& mesh, const ContactData& contact);

}  // namespace viscontact
