#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace viscontact {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Closed x-interval on the bottom edge of the rectangle.
struct BottomSegment {
  double x0 = 0.0;
  double x1 = 0.0;
};

/// Upper half-disk sitting on the top edge of the rectangle.
struct HalfDisk {
  Point2 center;
  double radius = 0.0;
};

/// Rectangle (optionally capped by a half-disk) with its boundary split into
/// the clamped part, the contact part and the remaining traction part.
///
/// The clamped and contact parts are intervals of the bottom edge; everything
/// else is traction boundary. When a cap is present its arc carries the load.
struct DomainSpec {
  Point2 lower;                 // rectangle corner (x_min, y_min)
  Point2 upper;                 // rectangle corner (x_max, y_max)
  std::optional<HalfDisk> cap;  // must span the full top edge when present
  BottomSegment gamma1;
  std::optional<BottomSegment> gamma3;

  double width() const { return upper.x - lower.x; }
  double height() const { return upper.y - lower.y; }
  /// Exact area of the continuous domain.
  double area() const;
  bool has_load_arc() const { return cap.has_value(); }
  /// True when `p` lies on the load arc (within `tol`).
  bool on_load_arc(Point2 p, double tol = 1e-9) const;
};

enum class BoundaryTag { gamma1, gamma2, gamma3 };

const char* to_string(BoundaryTag tag);

struct BoundaryEdge {
  std::array<int, 2> nodes{};  // oriented counterclockwise around the domain
  BoundaryTag tag = BoundaryTag::gamma2;
  Point2 normal;               // outward unit normal
  bool on_load_arc = false;
};

/// Conforming P1 triangulation. Immutable after construction.
struct Mesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  double triangle_area(std::size_t t) const;
  double edge_length(const BoundaryEdge& e) const;
  /// Number of boundary edges carrying `tag`.
  std::size_t count_edges(BoundaryTag tag) const;
  /// Shoelace area of the boundary polygon formed by the boundary edges.
  double boundary_polygon_area() const;
};

/// The reference body: [0,5]x[0,2] m with an upper half-disk of radius 2.5 m
/// centered at (2.5, 2), clamped on [0,1]x{0} and in contact on [4,5]x{0}.
DomainSpec build_reference_domain();

/// Unit square clamped along its whole bottom edge, no contact part, no cap.
DomainSpec unit_square_domain();

/// Graded Delaunay triangulation. Boundary edges on gamma1/gamma3 are no
/// longer than `h_contact_boundary`; the size grows linearly away from them
/// up to `h_interior`. Deterministic.
Mesh triangulate(const DomainSpec& domain, double h_interior, double h_contact_boundary);

/// Checks the structural invariants (positive areas, conformity, each
/// boundary edge owned by exactly one triangle). Throws MeshFailure.
void validate_mesh(const Mesh& mesh);

/// Two displacement DOFs per node not on gamma1.
struct DofMap {
  std::vector<int> node_to_dof;  // first DOF (x) of the node, -1 when clamped
  std::vector<int> dof_to_node;
  std::size_t num_dofs = 0;

  bool is_free(int node) const { return node_to_dof[static_cast<std::size_t>(node)] >= 0; }
  /// DOF index of component `c` (0 = x, 1 = y) of `node`, or -1 when clamped.
  int dof(int node, int c) const {
    const int base = node_to_dof[static_cast<std::size_t>(node)];
    return base < 0 ? -1 : base + c;
  }
};

DofMap free_dof_map(const Mesh& mesh);

/// Plain-text export: `nodes N triangles M edges K` followed by node,
/// triangle and edge lines, 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace viscontact
