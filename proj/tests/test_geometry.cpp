#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "viscontact/errors.hpp"
#include "viscontact/geometry.hpp"

using namespace viscontact;

TEST_CASE("reference domain boundary parts") {
  const DomainSpec d = build_reference_domain();
  CHECK(d.gamma1.x0 == 0.0);
  CHECK(d.gamma1.x1 == 1.0);
  REQUIRE(d.gamma3.has_value());
  CHECK(d.gamma3->x0 == 4.0);
  CHECK(d.gamma3->x1 == 5.0);
  CHECK(d.lower.y == 0.0);

  const Point2 apex{2.5, 4.5};
  CHECK(d.on_load_arc(apex));
  const double r = std::hypot(apex.x - d.cap->center.x, apex.y - d.cap->center.y);
  CHECK(r == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_FALSE(d.on_load_arc({2.5, 2.0}));
  CHECK(d.area() == doctest::Approx(10.0 + 0.5 * std::numbers::pi * 6.25).epsilon(1e-14));
}

TEST_CASE("unit square with unit sizes is split into two triangles") {
  const Mesh mesh = triangulate(unit_square_domain(), 1.0, 1.0);
  CHECK(mesh.num_nodes() == 4);
  CHECK(mesh.num_triangles() == 2);
  validate_mesh(mesh);
  CHECK(mesh.count_edges(BoundaryTag::gamma1) == 1);
  CHECK(mesh.count_edges(BoundaryTag::gamma2) == 3);

  const DofMap dofs = free_dof_map(mesh);
  std::size_t above = 0;
  for (const Point2& p : mesh.nodes) above += p.y > 0.5 ? 1 : 0;
  CHECK(above == 2);
  CHECK(dofs.num_dofs == 2 * above);
}

TEST_CASE("fully clamped mesh has no DOFs") {
  Mesh mesh = triangulate(unit_square_domain(), 1.0, 1.0);
  for (auto& e : mesh.boundary_edges) e.tag = BoundaryTag::gamma1;
  const DofMap dofs = free_dof_map(mesh);
  CHECK(dofs.num_dofs == 0);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) CHECK_FALSE(dofs.is_free(static_cast<int>(i)));
}

TEST_CASE("reference mesh resolution") {
  const Mesh mesh = triangulate(build_reference_domain(), 0.275, 0.06);
  validate_mesh(mesh);
  const double triangles = static_cast<double>(mesh.num_triangles());
  CHECK(triangles >= 0.75 * 822);
  CHECK(triangles <= 1.25 * 822);
  const double contact_edges = static_cast<double>(mesh.count_edges(BoundaryTag::gamma3));
  CHECK(contact_edges >= 0.75 * 20);
  CHECK(contact_edges <= 1.25 * 20);

  double total = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    CHECK(mesh.triangle_area(t) > 0.0);
    total += mesh.triangle_area(t);
  }
  CHECK(std::abs(total - mesh.boundary_polygon_area()) <= 1e-9 * total);
  CHECK(std::abs(total - build_reference_domain().area()) <= 0.01 * total);

  // A P1 triangulation of a simply connected domain has
  // nodes = (triangles + boundary edges) / 2 + 1.
  const std::size_t boundary = mesh.boundary_edges.size();
  CHECK(mesh.num_nodes() == (mesh.num_triangles() + boundary) / 2 + 1);
  const DofMap dofs = free_dof_map(mesh);
  std::set<int> clamped;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::gamma1) clamped.insert(e.nodes.begin(), e.nodes.end());
  }
  CHECK(dofs.num_dofs == 2 * (mesh.num_nodes() - clamped.size()));
}

TEST_CASE("contact and clamped edges respect the boundary size") {
  const double hc = 0.06;
  const Mesh mesh = triangulate(build_reference_domain(), 0.275, hc);
  double gamma3_length = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == BoundaryTag::gamma2) continue;
    CHECK(mesh.edge_length(e) <= hc * (1.0 + 1e-12));
    CHECK(e.normal.x == doctest::Approx(0.0));
    CHECK(e.normal.y == doctest::Approx(-1.0));
    if (e.tag == BoundaryTag::gamma3) gamma3_length += mesh.edge_length(e);
  }
  CHECK(gamma3_length == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary edges are owned by one triangle and oriented outward") {
  const Mesh mesh = testing::small_mesh();
  validate_mesh(mesh);
  std::map<std::pair<int, int>, int> owners;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) owners[{tri[k], tri[(k + 1) % 3]}]++;
  }
  for (const auto& e : mesh.boundary_edges) {
    CHECK(owners[{e.nodes[0], e.nodes[1]}] == 1);
    CHECK(owners.count({e.nodes[1], e.nodes[0]}) == 0);
    const Point2 a = mesh.nodes[e.nodes[0]], b = mesh.nodes[e.nodes[1]];
    const double len = mesh.edge_length(e);
    CHECK(e.normal.x == doctest::Approx((b.y - a.y) / len));
    CHECK(e.normal.y == doctest::Approx(-(b.x - a.x) / len));
  }
}

TEST_CASE("load arc edges lie on the cap") {
  const DomainSpec d = build_reference_domain();
  const Mesh mesh = triangulate(d, 0.275, 0.06);
  std::size_t arc = 0;
  for (const auto& e : mesh.boundary_edges) {
    if (!e.on_load_arc) continue;
    ++arc;
    CHECK(d.on_load_arc(mesh.nodes[e.nodes[0]]));
    CHECK(d.on_load_arc(mesh.nodes[e.nodes[1]]));
  }
  CHECK(arc > 0);
}

TEST_CASE("triangulation is deterministic") {
  const Mesh a = testing::small_mesh();
  const Mesh b = testing::small_mesh();
  REQUIRE(a.num_nodes() == b.num_nodes());
  REQUIRE(a.num_triangles() == b.num_triangles());
  for (std::size_t i = 0; i < a.num_nodes(); ++i) {
    CHECK(a.nodes[i].x == b.nodes[i].x);
    CHECK(a.nodes[i].y == b.nodes[i].y);
  }
  for (std::size_t t = 0; t < a.num_triangles(); ++t) CHECK(a.triangles[t] == b.triangles[t]);
}

TEST_CASE("invalid sizes and domains are rejected") {
  CHECK_THROWS_AS(triangulate(build_reference_domain(), 0.1, 0.2), InvalidSizes);
  CHECK_THROWS_AS(triangulate(build_reference_domain(), 0.1, 0.0), InvalidSizes);
  DomainSpec overlap = testing::small_domain();
  overlap.gamma3 = BottomSegment{0.25, 1.0};
  CHECK_THROWS_AS(triangulate(overlap, 0.4, 0.125), MeshFailure);
}

TEST_CASE("validate_mesh detects an inverted triangle") {
  Mesh mesh = triangulate(unit_square_domain(), 1.0, 1.0);
  std::swap(mesh.triangles[0][0], mesh.triangles[0][1]);
  CHECK_THROWS_AS(validate_mesh(mesh), MeshFailure);
}

TEST_CASE("mesh export roundtrip") {
  const Mesh mesh = testing::small_mesh();
  std::stringstream ss;
  write_mesh(ss, mesh);
  const Mesh back = read_mesh(ss);
  REQUIRE(back.num_nodes() == mesh.num_nodes());
  REQUIRE(back.num_triangles() == mesh.num_triangles());
  REQUIRE(back.boundary_edges.size() == mesh.boundary_edges.size());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    CHECK(back.nodes[i].x == mesh.nodes[i].x);
    CHECK(back.nodes[i].y == mesh.nodes[i].y);
  }
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    CHECK(back.boundary_edges[e].nodes == mesh.boundary_edges[e].nodes);
    CHECK(back.boundary_edges[e].tag == mesh.boundary_edges[e].tag);
  }
}
