#pragma once

#include <array>
#include <vector>

#include "viscontact/geometry.hpp"

namespace viscontact::detail {

/// Incremental Bowyer-Watson Delaunay triangulation inside a large
/// enclosing triangle. Predicates are evaluated in long double.
class Delaunay {
 public:
  Delaunay(Point2 lo, Point2 hi);

  /// Inserts `p` and returns its index among the user points (insertion order).
  int insert(Point2 p);

  /// Triangles not touching the enclosing triangle, counterclockwise, indexed
  /// by user point order.
  std::vector<std::array<int, 3>> triangles() const;

  std::size_t num_points() const { return pts_.size() - 3; }

 private:
  struct Tri {
    std::array<int, 3> v{};
    std::array<int, 3> nbr{};  // nbr[i] is across the edge opposite v[i]
    bool alive = true;
  };

  int locate(const Point2& p) const;

  std::vector<Point2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> mark_;
  int stamp_ = 0;
};

long double orient2d(const Point2& a, const Point2& b, const Point2& c);
/// Positive when `d` lies inside the circumcircle of counterclockwise (a, b, c).
long double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

}  // namespace viscontact::detail
