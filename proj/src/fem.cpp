#include "viscontact/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <thread>

#include "viscontact/errors.hpp"
#include "viscontact/history.hpp"

namespace viscontact {

RelaxationKernel RelaxationKernel::constant(double b) {
  RelaxationKernel k;
  k.constant_ = true;
  k.value_ = b;
  return k;
}

RelaxationKernel RelaxationKernel::sampled(std::vector<double> lag_values) {
  if (lag_values.empty()) throw Error("RelaxationKernel: empty sample list");
  RelaxationKernel k;
  k.constant_ = false;
  k.samples_ = std::move(lag_values);
  return k;
}

RelaxationKernel RelaxationKernel::from_function(const std::function<double(double)>& beta, double k,
                                                 std::size_t count) {
  std::vector<double> s(count);
  for (std::size_t m = 0; m < count; ++m) s[m] = beta(static_cast<double>(m) * k);
  return sampled(std::move(s));
}

double RelaxationKernel::at_lag(std::size_t m) const {
  if (constant_) return value_;
  if (m >= samples_.size()) throw Error("RelaxationKernel: lag " + std::to_string(m) + " beyond sampled range");
  return samples_[m];
}

void MaterialModel::validate() const {
  if (!(young_E > 0.0)) throw SingularMaterial("material: Young's modulus must be positive");
  if (!(poisson_kappa > 0.0 && poisson_kappa < 0.5)) {
    throw SingularMaterial("material: Poisson ratio must lie in (0, 0.5)");
  }
}

double MaterialModel::lame_lambda() const {
  return young_E * poisson_kappa / ((1.0 + poisson_kappa) * (1.0 - 2.0 * poisson_kappa));
}

double MaterialModel::shear_factor() const { return young_E / (1.0 + poisson_kappa); }

Sym2 elasticity_apply(const Sym2& omega, const MaterialModel& material) {
  const double lam = material.lame_lambda();
  const double g = material.shear_factor();
  const double tr = omega.trace();
  return {lam * tr + g * omega.xx, g * omega.xy, lam * tr + g * omega.yy};
}

Eigen::Matrix3d elasticity_matrix(const MaterialModel& material) {
  const double lam = material.lame_lambda();
  const double g = material.shear_factor();
  Eigen::Matrix3d a;
  a << lam + g, lam, 0.0, lam, lam + g, 0.0, 0.0, 0.0, g;
  return a;
}

LoadSpec sinusoidal_arc_load(double amplitude) {
  LoadSpec loads;
  loads.traction = [amplitude](Point2, double t) { return Point2{0.0, amplitude * std::sin(t)}; };
  loads.traction_on_load_arc_only = true;
  return loads;
}

double ContactData::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

ContactData contact_trace(const Mesh& mesh, const DofMap& dofs, double yield_limit) {
  if (yield_limit < 0.0) throw Error("contact_trace: yield limit must be nonnegative");
  std::map<int, double> weight;  // node -> lumped length
  std::map<int, Point2> normal;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma3) continue;
    const double half = 0.5 * mesh.edge_length(e);
    for (int n : e.nodes) {
      weight[n] += half;
      normal[n] = e.normal;
    }
  }
  if (weight.empty()) throw Error("contact_trace: no gamma3 edges");
  std::vector<int> order;
  for (const auto& [n, w] : weight) order.push_back(n);
  std::stable_sort(order.begin(), order.end(), [&mesh](int a, int b) {
    return mesh.nodes[static_cast<std::size_t>(a)].x < mesh.nodes[static_cast<std::size_t>(b)].x;
  });

  ContactData c;
  for (int n : order) {
    const Point2 nu = normal[n];
    int comp = -1;
    double sign = 0.0;
    if (nu.x == 0.0 && std::abs(nu.y) == 1.0) {
      comp = 1;
      sign = nu.y;
    } else if (nu.y == 0.0 && std::abs(nu.x) == 1.0) {
      comp = 0;
      sign = nu.x;
    } else {
      throw Error("contact_trace: contact normals must be axis-aligned");
    }
    if (!dofs.is_free(n)) continue;  // clamped: v_nu vanishes identically
    c.nodes.push_back(n);
    c.weights.push_back(weight[n]);
    c.yield_limit.push_back(yield_limit);
    c.normal_dof.push_back(dofs.dof(n, comp));
    c.normal_sign.push_back(sign);
    c.tangent_dof.push_back(dofs.dof(n, 1 - comp));
  }
  return c;
}

std::vector<ElementGeometry> element_geometry(const Mesh& mesh) {
  std::vector<ElementGeometry> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point2 p0 = mesh.nodes[static_cast<std::size_t>(tri[0])];
    const Point2 p1 = mesh.nodes[static_cast<std::size_t>(tri[1])];
    const Point2 p2 = mesh.nodes[static_cast<std::size_t>(tri[2])];
    const double det = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
    ElementGeometry& g = out[t];
    g.area = 0.5 * det;
    g.dndx = {(p1.y - p2.y) / det, (p2.y - p0.y) / det, (p0.y - p1.y) / det};
    g.dndy = {(p2.x - p1.x) / det, (p0.x - p2.x) / det, (p1.x - p0.x) / det};
  }
  return out;
}

namespace {

/// Strain of the shape function of local node `a`, component `c`.
Sym2 basis_strain(const ElementGeometry& g, int a, int c) {
  const double gx = g.dndx[static_cast<std::size_t>(a)];
  const double gy = g.dndy[static_cast<std::size_t>(a)];
  return c == 0 ? Sym2{gx, 0.5 * gy, 0.0} : Sym2{0.0, 0.5 * gx, gy};
}

using ElementMatrix = std::array<double, 21>;  // upper triangle of 6x6, row-major

constexpr int upper_index(int i, int j) { return i * 6 - i * (i - 1) / 2 + (j - i); }

ElementMatrix element_matrix(const ElementGeometry& g, const std::function<Sym2(const Sym2&)>& tensor) {
  std::array<Sym2, 6> eps{};
  std::array<Sym2, 6> image{};
  for (int i = 0; i < 6; ++i) {
    eps[static_cast<std::size_t>(i)] = basis_strain(g, i / 2, i % 2);
    image[static_cast<std::size_t>(i)] = tensor(eps[static_cast<std::size_t>(i)]);
  }
  ElementMatrix m{};
  for (int i = 0; i < 6; ++i) {
    for (int j = i; j < 6; ++j) {
      m[static_cast<std::size_t>(upper_index(i, j))] =
          g.area * contract(image[static_cast<std::size_t>(i)], eps[static_cast<std::size_t>(j)]);
    }
  }
  return m;
}

}  // namespace

std::vector<Sym2> strain_field(const Mesh& mesh, const DofMap& dofs, const Vector& u) {
  const auto geo = element_geometry(mesh);
  std::vector<Sym2> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    Sym2 e;
    for (int a = 0; a < 3; ++a) {
      const int node = mesh.triangles[t][static_cast<std::size_t>(a)];
      if (!dofs.is_free(node)) continue;
      for (int c = 0; c < 2; ++c) e += u[dofs.dof(node, c)] * basis_strain(geo[t], a, c);
    }
    out[t] = e;
  }
  return out;
}

Vector internal_force(const Mesh& mesh, const DofMap& dofs, const std::vector<Sym2>& tau) {
  const auto geo = element_geometry(mesh);
  Vector q = Vector::Zero(static_cast<Eigen::Index>(dofs.num_dofs));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int a = 0; a < 3; ++a) {
      const int node = mesh.triangles[t][static_cast<std::size_t>(a)];
      if (!dofs.is_free(node)) continue;
      for (int c = 0; c < 2; ++c) q[dofs.dof(node, c)] += geo[t].area * contract(tau[t], basis_strain(geo[t], a, c));
    }
  }
  return q;
}

double q_inner(const Mesh& mesh, const std::vector<Sym2>& a, const std::vector<Sym2>& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) s += mesh.triangle_area(t) * contract(a[t], b[t]);
  return s;
}

SparseMatrix assemble_tensor(const Mesh& mesh, const DofMap& dofs, const std::function<Sym2(const Sym2&)>& tensor,
                             AssemblyOptions opts) {
  const auto geo = element_geometry(mesh);
  const std::size_t ne = geo.size();
  std::vector<ElementMatrix> local(ne);

  // Element kernels run in parallel; the reduction below runs in element order.
  const std::size_t nthreads = static_cast<std::size_t>(std::clamp(opts.threads, 1, 64));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) local[t] = element_matrix(geo[t], tensor);
  };
  if (nthreads == 1 || ne < 2 * nthreads) {
    work(0, ne);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (ne + nthreads - 1) / nthreads;
    for (std::size_t w = 0; w < nthreads; ++w) {
      const std::size_t b = w * chunk, e = std::min(ne, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(ne * 36);
  for (std::size_t t = 0; t < ne; ++t) {
    std::array<int, 6> gdof{};
    for (int i = 0; i < 6; ++i) gdof[static_cast<std::size_t>(i)] = dofs.dof(mesh.triangles[t][static_cast<std::size_t>(i / 2)], i % 2);
    for (int i = 0; i < 6; ++i) {
      const int gi = gdof[static_cast<std::size_t>(i)];
      if (gi < 0) continue;
      for (int j = i; j < 6; ++j) {
        const int gj = gdof[static_cast<std::size_t>(j)];
        if (gj < 0) continue;
        const double v = local[t][static_cast<std::size_t>(upper_index(i, j))];
        triplets.emplace_back(gi, gj, v);
        if (i != j) triplets.emplace_back(gj, gi, v);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(dofs.num_dofs);
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const MaterialModel& material,
                                AssemblyOptions opts) {
  material.validate();
  return assemble_tensor(mesh, dofs, [&material](const Sym2& w) { return elasticity_apply(w, material); }, opts);
}

SparseMatrix assemble_strain_gram(const Mesh& mesh, const DofMap& dofs, AssemblyOptions opts) {
  return assemble_tensor(mesh, dofs, [](const Sym2& w) { return w; }, opts);
}

Vector assemble_load(const Mesh& mesh, const DofMap& dofs, const LoadSpec& loads, double t) {
  Vector f = Vector::Zero(static_cast<Eigen::Index>(dofs.num_dofs));
  auto add = [&](int node, Point2 force) {
    if (!dofs.is_free(node)) return;
    f[dofs.dof(node, 0)] += force.x;
    f[dofs.dof(node, 1)] += force.y;
  };
  if (loads.body_force) {
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
      const double w = mesh.triangle_area(e) / 3.0;
      for (int node : mesh.triangles[e]) {
        const Point2 b = loads.body_force(mesh.nodes[static_cast<std::size_t>(node)], t);
        add(node, {w * b.x, w * b.y});
      }
    }
  }
  if (loads.traction) {
    for (const BoundaryEdge& e : mesh.boundary_edges) {
      if (e.tag != BoundaryTag::gamma2) continue;
      if (loads.traction_on_load_arc_only && !e.on_load_arc) continue;
      const double w = 0.5 * mesh.edge_length(e);
      for (int node : e.nodes) {
        const Point2 q = loads.traction(mesh.nodes[static_cast<std::size_t>(node)], t);
        add(node, {w * q.x, w * q.y});
      }
    }
  }
  return f;
}

std::vector<Sym2> reconstruct_stress_field(const Vector& u, std::size_t step_index, const HistoryState& history,
                                           const Mesh& mesh, const DofMap& dofs, const MaterialModel& material) {
  if (history.step_index != step_index) {
    throw HistoryMismatch("reconstruct_stress_field: history holds " + std::to_string(history.step_index) +
                          " steps, expected " + std::to_string(step_index));
  }
  auto sigma = strain_field(mesh, dofs, u);
  for (auto& s : sigma) s = elasticity_apply(s, material);
  if (history.memory_displacement.size() > 0) {
    const auto memory = strain_field(mesh, dofs, history.memory_displacement);
    for (std::size_t t = 0; t < sigma.size(); ++t) sigma[t] += memory[t];
  }
  return sigma;
}

int threads_from_env() {
  if (const char* v = std::getenv("VISCONTACT_THREADS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace viscontact
