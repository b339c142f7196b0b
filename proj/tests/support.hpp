#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "viscontact/solver.hpp"

namespace viscontact::testing {

/// Rectangle [0,2]x[0,1] clamped on [0,0.5]x{0} and in contact on [1.5,2]x{0}.
inline DomainSpec small_domain() {
  DomainSpec d;
  d.lower = {0.0, 0.0};
  d.upper = {2.0, 1.0};
  d.gamma1 = {0.0, 0.5};
  d.gamma3 = BottomSegment{1.5, 2.0};
  return d;
}

inline Mesh small_mesh() { return triangulate(small_domain(), 0.4, 0.125); }

/// Uniform vertical traction `amplitude * sin t` on the top edge.
inline LoadSpec top_load(double amplitude) {
  LoadSpec loads;
  loads.traction = [amplitude](Point2 p, double t) {
    return p.y > 1.0 - 1e-9 ? Point2{0.0, amplitude * std::sin(t)} : Point2{0.0, 0.0};
  };
  loads.traction_on_load_arc_only = false;
  return loads;
}

inline MaterialModel material(double b) {
  MaterialModel m;
  m.relaxation = RelaxationKernel::constant(b);
  return m;
}

inline Model small_model(double b, double amplitude = 10.0, double F = 10.0) {
  return build_model(small_mesh(), material(b), top_load(amplitude), F);
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace viscontact::testing
