#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "viscontact/errors.hpp"

namespace viscontact::detail {

long double orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return abx * acy - aby * acx;
}

long double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

Delaunay::Delaunay(Point2 lo, Point2 hi) {
  const double cx = 0.5 * (lo.x + hi.x);
  const double cy = 0.5 * (lo.y + hi.y);
  const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-3});
  pts_.push_back({cx - 200.0 * span, cy - 100.0 * span});
  pts_.push_back({cx + 200.0 * span, cy - 100.0 * span});
  pts_.push_back({cx, cy + 200.0 * span});
  tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true});
  mark_.push_back(0);
}

int Delaunay::locate(const Point2& p) const {
  int best = -1;
  long double best_score = -std::numeric_limits<long double>::infinity();
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const Tri& tri = tris_[t];
    if (!tri.alive) continue;
    // Smallest edge orientation; nonnegative means p is inside or on the edge.
    long double worst = std::numeric_limits<long double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const Point2& a = pts_[static_cast<std::size_t>(tri.v[(i + 1) % 3])];
      const Point2& b = pts_[static_cast<std::size_t>(tri.v[(i + 2) % 3])];
      worst = std::min(worst, orient2d(a, b, p));
    }
    if (worst >= 0) return static_cast<int>(t);
    if (worst > best_score) {
      best_score = worst;
      best = static_cast<int>(t);
    }
  }
  return best;
}

int Delaunay::insert(Point2 p) {
  const int pid = static_cast<int>(pts_.size());
  pts_.push_back(p);

  const int start = locate(p);
  if (start < 0) throw MeshFailure("delaunay: point location failed");

  ++stamp_;
  std::vector<int> cavity{start};
  mark_[static_cast<std::size_t>(start)] = stamp_;
  auto grow = [&](std::size_t from) {
    for (std::size_t k = from; k < cavity.size(); ++k) {
      const Tri& tri = tris_[static_cast<std::size_t>(cavity[k])];
      for (int i = 0; i < 3; ++i) {
        const int nb = tri.nbr[i];
        if (nb < 0 || mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
        const Tri& other = tris_[static_cast<std::size_t>(nb)];
        if (incircle(pts_[static_cast<std::size_t>(other.v[0])], pts_[static_cast<std::size_t>(other.v[1])],
                     pts_[static_cast<std::size_t>(other.v[2])], p) > 0) {
          mark_[static_cast<std::size_t>(nb)] = stamp_;
          cavity.push_back(nb);
        }
      }
    }
  };
  grow(0);

  struct Rim {
    int a, b, outer;
  };
  std::vector<Rim> rim;
  // The cavity must be star-shaped from p; absorb any triangle across a rim
  // edge that p does not see strictly.
  for (;;) {
    rim.clear();
    bool repaired = false;
    for (const int t : cavity) {
      const Tri& tri = tris_[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i) {
        const int nb = tri.nbr[i];
        if (nb >= 0 && mark_[static_cast<std::size_t>(nb)] == stamp_) continue;
        const int a = tri.v[(i + 1) % 3];
        const int b = tri.v[(i + 2) % 3];
        if (orient2d(pts_[static_cast<std::size_t>(a)], pts_[static_cast<std::size_t>(b)], p) <= 0) {
          if (nb < 0) throw MeshFailure("delaunay: point outside enclosing triangle");
          mark_[static_cast<std::size_t>(nb)] = stamp_;
          cavity.push_back(nb);
          repaired = true;
          break;
        }
        rim.push_back({a, b, nb});
      }
      if (repaired) break;
    }
    if (!repaired) break;
  }

  for (const int t : cavity) tris_[static_cast<std::size_t>(t)].alive = false;

  std::unordered_map<int, int> starts_at;  // rim vertex a -> new triangle (a, b, p)
  std::unordered_map<int, int> ends_at;    // rim vertex b -> new triangle (a, b, p)
  std::vector<int> created;
  created.reserve(rim.size());
  for (const Rim& r : rim) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back(Tri{{r.a, r.b, pid}, {-1, -1, r.outer}, true});
    mark_.push_back(0);
    created.push_back(id);
    starts_at[r.a] = id;
    ends_at[r.b] = id;
    if (r.outer >= 0) {
      Tri& o = tris_[static_cast<std::size_t>(r.outer)];
      for (int j = 0; j < 3; ++j) {
        const int oa = o.v[(j + 1) % 3];
        const int ob = o.v[(j + 2) % 3];
        if (oa == r.b && ob == r.a) o.nbr[j] = id;
      }
    }
  }
  for (const int id : created) {
    Tri& t = tris_[static_cast<std::size_t>(id)];
    // Opposite a: edge (b, p), shared with the triangle starting at b.
    t.nbr[0] = starts_at.at(t.v[1]);
    // Opposite b: edge (p, a), shared with the triangle ending at a.
    t.nbr[1] = ends_at.at(t.v[0]);
  }
  return pid - 3;
}

std::vector<std::array<int, 3>> Delaunay::triangles() const {
  std::vector<std::array<int, 3>> out;
  for (const Tri& t : tris_) {
    if (!t.alive) continue;
    if (t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
    out.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
  }
  return out;
}

}  // namespace viscontact::detail
