#include "viscontact/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "delaunay.hpp"
#include "viscontact/errors.hpp"

namespace viscontact {

namespace {

constexpr double kGeomTol = 1e-9;
// Growth rate of the element size with distance from the clamped/contact parts.
constexpr double kGrading = 0.35;
// A triangle is refined when its circumradius exceeds this multiple of the
// local size.
constexpr double kCircumradiusRatio = 0.7072;
constexpr int kSmoothingPasses = 6;

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double dist_to_segment(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return dist(p, {a.x + s * dx, a.y + s * dy});
}

bool inside_segment(double x, const BottomSegment& s) {
  return x >= s.x0 - kGeomTol && x <= s.x1 + kGeomTol;
}

class SizeField {
 public:
  SizeField(const DomainSpec& d, double h_int, double h_c) : d_(d), h_int_(h_int), h_c_(h_c) {}

  double operator()(Point2 p) const {
    double dmin = dist_to_segment(p, {d_.gamma1.x0, d_.lower.y}, {d_.gamma1.x1, d_.lower.y});
    if (d_.gamma3) {
      dmin = std::min(dmin, dist_to_segment(p, {d_.gamma3->x0, d_.lower.y}, {d_.gamma3->x1, d_.lower.y}));
    }
    return std::min(h_int_, h_c_ + kGrading * dmin);
  }

 private:
  const DomainSpec& d_;
  double h_int_;
  double h_c_;
};

/// Points along a curve c(s), s in [0,1], spaced so that each piece carries at
/// most one unit of the integral of 1/h. Excludes the final endpoint.
std::vector<Point2> sample_curve(const std::function<Point2(double)>& curve, const SizeField& size) {
  constexpr int kFine = 4000;
  std::vector<double> cumulative(kFine + 1, 0.0);
  Point2 prev = curve(0.0);
  double prev_density = 1.0 / size(prev);
  for (int i = 1; i <= kFine; ++i) {
    const Point2 cur = curve(static_cast<double>(i) / kFine);
    const double density = 1.0 / size(cur);
    cumulative[static_cast<std::size_t>(i)] =
        cumulative[static_cast<std::size_t>(i - 1)] + 0.5 * (prev_density + density) * dist(prev, cur);
    prev = cur;
    prev_density = density;
  }
  const double total = cumulative.back();
  const int pieces = std::max(1, static_cast<int>(std::ceil(total - 1e-9)));
  std::vector<Point2> out;
  out.push_back(curve(0.0));
  std::size_t j = 0;
  for (int k = 1; k < pieces; ++k) {
    const double target = total * k / pieces;
    while (cumulative[j + 1] < target) ++j;
    const double frac = (target - cumulative[j]) / (cumulative[j + 1] - cumulative[j]);
    out.push_back(curve((static_cast<double>(j) + frac) / kFine));
  }
  return out;
}

std::vector<Point2> sample_segment_uniform(Point2 a, Point2 b, double h) {
  const int pieces = std::max(1, static_cast<int>(std::ceil(dist(a, b) / h - 1e-9)));
  std::vector<Point2> out;
  for (int k = 0; k < pieces; ++k) {
    const double s = static_cast<double>(k) / pieces;
    out.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
  }
  return out;
}

void validate_domain(const DomainSpec& d) {
  if (!(d.upper.x > d.lower.x && d.upper.y > d.lower.y)) throw MeshFailure("domain: empty rectangle");
  if (d.cap) {
    const double r = d.cap->radius;
    if (std::abs(d.cap->center.x - 0.5 * (d.lower.x + d.upper.x)) > kGeomTol ||
        std::abs(d.cap->center.y - d.upper.y) > kGeomTol || std::abs(2.0 * r - d.width()) > kGeomTol) {
      throw MeshFailure("domain: cap must span the full top edge");
    }
  }
  auto check = [&](const BottomSegment& s, const char* name) {
    if (!(s.x1 > s.x0) || s.x0 < d.lower.x - kGeomTol || s.x1 > d.upper.x + kGeomTol) {
      throw MeshFailure(std::string("domain: invalid ") + name);
    }
  };
  check(d.gamma1, "gamma1");
  if (d.gamma3) {
    check(*d.gamma3, "gamma3");
    if (d.gamma3->x0 < d.gamma1.x1 - kGeomTol && d.gamma1.x0 < d.gamma3->x1 - kGeomTol) {
      throw MeshFailure("domain: gamma1 and gamma3 overlap");
    }
  }
}

/// Counterclockwise boundary polygon starting at the lower-left corner.
std::vector<Point2> boundary_polygon(const DomainSpec& d, const SizeField& size, double h_c) {
  const double y0 = d.lower.y;
  std::vector<double> breaks{d.lower.x, d.upper.x, d.gamma1.x0, d.gamma1.x1};
  if (d.gamma3) {
    breaks.push_back(d.gamma3->x0);
    breaks.push_back(d.gamma3->x1);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < kGeomTol; }),
               breaks.end());

  std::vector<Point2> poly;
  auto append = [&poly](const std::vector<Point2>& pts) { poly.insert(poly.end(), pts.begin(), pts.end()); };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const Point2 a{breaks[i], y0}, b{breaks[i + 1], y0};
    const double mid = 0.5 * (a.x + b.x);
    const bool contact = inside_segment(mid, d.gamma1) || (d.gamma3 && inside_segment(mid, *d.gamma3));
    if (contact) {
      append(sample_segment_uniform(a, b, h_c));
    } else {
      append(sample_curve([a, b](double s) { return Point2{a.x + s * (b.x - a.x), a.y}; }, size));
    }
  }
  const Point2 br{d.upper.x, d.lower.y}, tr{d.upper.x, d.upper.y}, tl{d.lower.x, d.upper.y},
      bl{d.lower.x, d.lower.y};
  append(sample_curve([br, tr](double s) { return Point2{br.x, br.y + s * (tr.y - br.y)}; }, size));
  if (d.cap) {
    const HalfDisk cap = *d.cap;
    append(sample_curve(
        [cap](double s) {
          const double th = std::numbers::pi * s;
          return Point2{cap.center.x + cap.radius * std::cos(th), cap.center.y + cap.radius * std::sin(th)};
        },
        size));
  } else {
    append(sample_curve([tr, tl](double s) { return Point2{tr.x + s * (tl.x - tr.x), tr.y}; }, size));
  }
  append(sample_curve([tl, bl](double s) { return Point2{tl.x, tl.y + s * (bl.y - tl.y)}; }, size));
  return poly;
}

bool point_in_convex_polygon(Point2 p, const std::vector<Point2>& poly, double margin) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const double len = dist(a, b);
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross / len < margin) return false;
  }
  return true;
}

double dist_to_polygon(Point2 p, const std::vector<Point2>& poly) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) d = std::min(d, dist_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return d;
}

Point2 circumcenter(Point2 a, Point2 b, Point2 c) {
  const double bx = b.x - a.x, by = b.y - a.y, cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

std::vector<std::array<int, 3>> delaunay_of(const std::vector<Point2>& pts, const DomainSpec& d) {
  detail::Delaunay dt({d.lower.x, d.lower.y}, {d.upper.x, d.cap ? d.cap->center.y + d.cap->radius : d.upper.y});
  for (const Point2& p : pts) dt.insert(p);
  return dt.triangles();
}

BoundaryTag classify(Point2 a, Point2 b, const DomainSpec& d) {
  if (std::abs(a.y - d.lower.y) < kGeomTol && std::abs(b.y - d.lower.y) < kGeomTol) {
    const double mid = 0.5 * (a.x + b.x);
    if (inside_segment(mid, d.gamma1)) return BoundaryTag::gamma1;
    if (d.gamma3 && inside_segment(mid, *d.gamma3)) return BoundaryTag::gamma3;
  }
  return BoundaryTag::gamma2;
}

}  // namespace

double DomainSpec::area() const {
  double a = width() * height();
  if (cap) a += 0.5 * std::numbers::pi * cap->radius * cap->radius;
  return a;
}

bool DomainSpec::on_load_arc(Point2 p, double tol) const {
  if (!cap) return false;
  return std::abs(dist(p, cap->center) - cap->radius) <= tol && p.y >= cap->center.y - tol;
}

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::gamma1:
      return "gamma1";
    case BoundaryTag::gamma2:
      return "gamma2";
    case BoundaryTag::gamma3:
      return "gamma3";
  }
  return "?";
}

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point2 a = nodes[static_cast<std::size_t>(tri[0])], b = nodes[static_cast<std::size_t>(tri[1])],
               c = nodes[static_cast<std::size_t>(tri[2])];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double Mesh::edge_length(const BoundaryEdge& e) const {
  return dist(nodes[static_cast<std::size_t>(e.nodes[0])], nodes[static_cast<std::size_t>(e.nodes[1])]);
}

std::size_t Mesh::count_edges(BoundaryTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(boundary_edges.begin(), boundary_edges.end(), [tag](const BoundaryEdge& e) { return e.tag == tag; }));
}

double Mesh::boundary_polygon_area() const {
  double twice = 0.0;
  for (const BoundaryEdge& e : boundary_edges) {
    const Point2 a = nodes[static_cast<std::size_t>(e.nodes[0])], b = nodes[static_cast<std::size_t>(e.nodes[1])];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

DomainSpec build_reference_domain() {
  DomainSpec d;
  d.lower = {0.0, 0.0};
  d.upper = {5.0, 2.0};
  d.cap = HalfDisk{{2.5, 2.0}, 2.5};
  d.gamma1 = {0.0, 1.0};
  d.gamma3 = BottomSegment{4.0, 5.0};
  return d;
}

DomainSpec unit_square_domain() {
  DomainSpec d;
  d.lower = {0.0, 0.0};
  d.upper = {1.0, 1.0};
  d.gamma1 = {0.0, 1.0};
  return d;
}

Mesh triangulate(const DomainSpec& domain, double h_interior, double h_contact_boundary) {
  if (!(h_contact_boundary > 0.0) || !(h_contact_boundary <= h_interior) || !std::isfinite(h_interior)) {
    throw InvalidSizes("triangulate: require 0 < h_contact_boundary <= h_interior");
  }
  validate_domain(domain);
  const SizeField size(domain, h_interior, h_contact_boundary);

  const std::vector<Point2> poly = boundary_polygon(domain, size, h_contact_boundary);
  std::vector<Point2> pts = poly;
  const std::size_t n_boundary = poly.size();

  // Delaunay refinement by circumcenter insertion; centroids near the boundary.
  std::vector<std::array<int, 3>> tris = delaunay_of(pts, domain);
  const std::size_t max_points = 200000;
  for (int pass = 0;; ++pass) {
    if (pts.size() > max_points || pass > 200) throw MeshFailure("triangulate: refinement did not terminate");
    struct Candidate {
      double badness;
      Point2 p;
    };
    std::vector<Candidate> cands;
    for (const auto& t : tris) {
      const Point2 a = pts[static_cast<std::size_t>(t[0])], b = pts[static_cast<std::size_t>(t[1])],
                   c = pts[static_cast<std::size_t>(t[2])];
      const Point2 cc = circumcenter(a, b, c);
      const double radius = dist(cc, a);
      const Point2 centroid{(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
      const double h = size(centroid);
      if (radius <= kCircumradiusRatio * h) continue;
      Point2 p = cc;
      if (!point_in_convex_polygon(cc, poly, 0.0) || dist_to_polygon(cc, poly) < 0.5 * size(cc)) {
        p = centroid;
      }
      cands.push_back({radius / h, p});
    }
    if (cands.empty()) break;
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) { return x.badness > y.badness; });
    std::vector<Point2> accepted;
    for (const Candidate& c : cands) {
      const double h = size(c.p);
      bool clash = false;
      for (const Point2& q : accepted) {
        if (dist(q, c.p) < 0.5 * h) {
          clash = true;
          break;
        }
      }
      if (clash) continue;
      for (std::size_t i = 0; i < pts.size() && !clash; ++i) clash = dist(pts[i], c.p) < 1e-3 * h;
      if (!clash) accepted.push_back(c.p);
    }
    if (accepted.empty()) throw MeshFailure("triangulate: refinement stalled");
    pts.insert(pts.end(), accepted.begin(), accepted.end());
    tris = delaunay_of(pts, domain);
  }

  // Laplacian smoothing of interior points, retriangulating after each pass.
  for (int pass = 0; pass < kSmoothingPasses; ++pass) {
    std::vector<Point2> sum(pts.size(), Point2{0.0, 0.0});
    std::vector<int> count(pts.size(), 0);
    for (const auto& t : tris) {
      for (int i = 0; i < 3; ++i) {
        const auto a = static_cast<std::size_t>(t[i]);
        for (int j = 0; j < 3; ++j) {
          if (i == j) continue;
          const auto b = static_cast<std::size_t>(t[j]);
          sum[a].x += pts[b].x;
          sum[a].y += pts[b].y;
          ++count[a];
        }
      }
    }
    for (std::size_t i = n_boundary; i < pts.size(); ++i) {
      if (count[i] == 0) continue;
      pts[i] = {sum[i].x / count[i], sum[i].y / count[i]};
    }
    tris = delaunay_of(pts, domain);
  }

  Mesh mesh;
  mesh.nodes = pts;
  mesh.triangles = tris;

  // Boundary edges: edges owned by one triangle, oriented as in that triangle.
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>((i + 1) % 3)];
      ++edge_count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::map<int, std::pair<int, int>> by_start;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>((i + 1) % 3)];
      if (edge_count[{std::min(a, b), std::max(a, b)}] == 1) by_start[a] = {a, b};
    }
  }
  // Walk the boundary loop from node 0 (lower-left corner) so edges follow the polygon.
  if (by_start.size() != n_boundary) throw MeshFailure("triangulate: boundary not recovered");
  int cur = 0;
  for (std::size_t k = 0; k < n_boundary; ++k) {
    auto it = by_start.find(cur);
    if (it == by_start.end()) throw MeshFailure("triangulate: open boundary loop");
    const auto [a, b] = it->second;
    if (b != static_cast<int>((static_cast<std::size_t>(a) + 1) % n_boundary)) {
      throw MeshFailure("triangulate: boundary edge does not follow the polygon");
    }
    BoundaryEdge e;
    e.nodes = {a, b};
    const Point2 pa = pts[static_cast<std::size_t>(a)], pb = pts[static_cast<std::size_t>(b)];
    e.tag = classify(pa, pb, domain);
    const double dx = pb.x - pa.x, dy = pb.y - pa.y, len = std::hypot(dx, dy);
    e.normal = {dy / len, -dx / len};
    e.on_load_arc = domain.on_load_arc(pa) && domain.on_load_arc(pb);
    mesh.boundary_edges.push_back(e);
    cur = b;
  }
  validate_mesh(mesh);
  return mesh;
}

void validate_mesh(const Mesh& mesh) {
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.triangle_area(t) > 0.0)) throw MeshFailure("mesh: non-positive triangle area");
  }
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : mesh.triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>((i + 1) % 3)];
      if (++edge_count[{std::min(a, b), std::max(a, b)}] > 2) throw MeshFailure("mesh: non-manifold edge");
    }
  }
  std::size_t single = 0;
  for (const auto& [edge, n] : edge_count) single += (n == 1);
  if (single != mesh.boundary_edges.size()) throw MeshFailure("mesh: boundary edge count mismatch");
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const auto key = std::make_pair(std::min(e.nodes[0], e.nodes[1]), std::max(e.nodes[0], e.nodes[1]));
    const auto it = edge_count.find(key);
    if (it == edge_count.end() || it->second != 1) throw MeshFailure("mesh: boundary edge not owned by one triangle");
  }
}

DofMap free_dof_map(const Mesh& mesh) {
  DofMap map;
  std::vector<bool> clamped(mesh.num_nodes(), false);
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma1) continue;
    clamped[static_cast<std::size_t>(e.nodes[0])] = true;
    clamped[static_cast<std::size_t>(e.nodes[1])] = true;
  }
  map.node_to_dof.assign(mesh.num_nodes(), -1);
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    if (clamped[n]) continue;
    map.node_to_dof[n] = static_cast<int>(map.num_dofs);
    map.dof_to_node.push_back(static_cast<int>(n));
    map.dof_to_node.push_back(static_cast<int>(n));
    map.num_dofs += 2;
  }
  return map;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  const auto old_precision = os.precision(17);
  os << "nodes " << mesh.nodes.size() << " triangles " << mesh.triangles.size() << " edges "
     << mesh.boundary_edges.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) os << i << ' ' << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << '\n';
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    os << i << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  for (std::size_t i = 0; i < mesh.boundary_edges.size(); ++i) {
    const auto& e = mesh.boundary_edges[i];
    os << i << ' ' << e.nodes[0] << ' ' << e.nodes[1] << ' ' << to_string(e.tag) << '\n';
  }
  os.precision(old_precision);
}

Mesh read_mesh(std::istream& is) {
  std::string w1, w2, w3;
  std::size_t n = 0, m = 0, k = 0;
  if (!(is >> w1 >> n >> w2 >> m >> w3 >> k) || w1 != "nodes" || w2 != "triangles" || w3 != "edges") {
    throw MeshFailure("read_mesh: bad header");
  }
  Mesh mesh;
  mesh.nodes.resize(n);
  mesh.triangles.resize(m);
  mesh.boundary_edges.resize(k);
  std::size_t id = 0;
  for (auto& p : mesh.nodes) {
    if (!(is >> id >> p.x >> p.y)) throw MeshFailure("read_mesh: bad node line");
  }
  for (auto& t : mesh.triangles) {
    if (!(is >> id >> t[0] >> t[1] >> t[2])) throw MeshFailure("read_mesh: bad triangle line");
  }
  for (auto& e : mesh.boundary_edges) {
    std::string tag;
    if (!(is >> id >> e.nodes[0] >> e.nodes[1] >> tag)) throw MeshFailure("read_mesh: bad edge line");
    if (tag == "gamma1") {
      e.tag = BoundaryTag::gamma1;
    } else if (tag == "gamma3") {
      e.tag = BoundaryTag::gamma3;
    } else if (tag == "gamma2") {
      e.tag = BoundaryTag::gamma2;
    } else {
      throw MeshFailure("read_mesh: unknown tag " + tag);
    }
    const Point2 a = mesh.nodes[static_cast<std::size_t>(e.nodes[0])], b = mesh.nodes[static_cast<std::size_t>(e.nodes[1])];
    const double dx = b.x - a.x, dy = b.y - a.y, len = std::hypot(dx, dy);
    e.normal = {dy / len, -dx / len};
  }
  return mesh;
}

}  // namespace viscontact
