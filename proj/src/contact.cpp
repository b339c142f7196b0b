#include "viscontact/contact.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace viscontact {

std::vector<double> normal_displacements(const Vector& v, const ContactData& contact) {
  std::vector<double> out(contact.size());
  for (std::size_t p = 0; p < contact.size(); ++p) out[p] = contact.normal_sign[p] * v[contact.normal_dof[p]];
  return out;
}

double eval_j(const Vector& v, const ContactData& contact) {
  double s = 0.0;
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const double vn = contact.normal_sign[p] * v[contact.normal_dof[p]];
    if (vn > 0.0) s += contact.alpha(p) * vn;
  }
  return s;
}

Vector subgradient_j(const Vector& v, const ContactData& contact) {
  Vector g = Vector::Zero(v.size());
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const double vn = contact.normal_sign[p] * v[contact.normal_dof[p]];
    if (vn > 0.0) g[contact.normal_dof[p]] = contact.normal_sign[p] * contact.alpha(p);
  }
  return g;
}

double prox_positive_part(double z, double alpha) {
  if (z > alpha) return z - alpha;
  if (z >= 0.0) return 0.0;
  return z;
}

Vector prox_j(const Vector& z, double step, const ContactData& contact) {
  Vector out = z;
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const int d = contact.normal_dof[p];
    const double s = contact.normal_sign[p];
    out[d] = s * prox_positive_part(s * z[d], step * contact.alpha(p));
  }
  return out;
}

std::vector<double> complementarity_residual(const Vector& u, const std::vector<double>& sigma_nu,
                                             const ContactData& contact, double tol_gap, double tol_stress) {
  std::vector<double> r(contact.size(), 0.0);
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const double un = contact.normal_sign[p] * u[contact.normal_dof[p]];
    const double sn = sigma_nu[p];
    const double F = contact.yield_limit[p];
    double v = 0.0;
    if (un < -tol_gap) v = std::max(v, std::abs(sn));
    v = std::max(v, std::max(sn, 0.0));
    v = std::max(v, std::max(-F - sn, 0.0));
    if (un > tol_gap) v = std::max(v, std::abs(sn + F));
    r[p] = v > tol_stress ? v : 0.0;
  }
  return r;
}

NodalTraction nodal_traction_from_residual(const Vector& residual, const ContactData& contact) {
  NodalTraction t;
  t.normal.resize(contact.size());
  t.tangential.resize(contact.size());
  for (std::size_t p = 0; p < contact.size(); ++p) {
    const double w = contact.weights[p];
    t.normal[p] = contact.normal_sign[p] * residual[contact.normal_dof[p]] / w;
    t.tangential[p] = residual[contact.tangent_dof[p]] / w;
  }
  return t;
}

NodalTraction nodal_traction_averaged(const std::vector<Sym2>& stress, const Mesh& mesh, const ContactData& contact) {
  std::map<std::pair<int, int>, std::size_t> owner;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int i = 0; i < 3; ++i) {
      const int a = tri[static_cast<std::size_t>(i)], b = tri[static_cast<std::size_t>((i + 1) % 3)];
      owner[{a, b}] = t;
    }
  }
  std::map<int, std::size_t> index;
  for (std::size_t p = 0; p < contact.size(); ++p) index[contact.nodes[p]] = p;

  std::vector<double> sum_n(contact.size(), 0.0), sum_t(contact.size(), 0.0), wsum(contact.size(), 0.0);
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma3) continue;
    const std::size_t t = owner.at({e.nodes[0], e.nodes[1]});
    const Sym2& s = stress[t];
    const Point2 nu = e.normal;
    const double tx = s.xx * nu.x + s.xy * nu.y;
    const double ty = s.xy * nu.x + s.yy * nu.y;
    const double sn = tx * nu.x + ty * nu.y;
    const double st = -tx * nu.y + ty * nu.x;
    const double area = mesh.triangle_area(t);
    for (int n : e.nodes) {
      const auto it = index.find(n);
      if (it == index.end()) continue;
      sum_n[it->second] += area * sn;
      sum_t[it->second] += area * st;
      wsum[it->second] += area;
    }
  }
  NodalTraction out;
  out.normal.resize(contact.size());
  out.tangential.resize(contact.size());
  for (std::size_t p = 0; p < contact.size(); ++p) {
    out.normal[p] = wsum[p] > 0 ? sum_n[p] / wsum[p] : 0.0;
    out.tangential[p] = wsum[p] > 0 ? sum_t[p] / wsum[p] : 0.0;
  }
  return out;
}

}  // namespace viscontact
