#pragma once

#include <cmath>
#include <random>

#include "mavoid/bvp.hpp"
#include "mavoid/geometry.hpp"

namespace testing {

using namespace mavoid;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(rng, -scale, scale);
  return v;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v(g(rng), g(rng), g(rng));
  return v / v.norm();
}

inline Vec3 random_tangent(std::mt19937_64& rng, const Vec3& p, double scale) {
  Vec3 v = random_vec(rng, 3, scale);
  return v - v.dot(p) * p;
}

inline Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

// Point on the great circle through p with initial unit direction u, at arc
// length s. Independent of exp_map.
inline Vec3 great_circle(const Vec3& p, const Vec3& u, double s) {
  return std::cos(s) * p + std::sin(s) * u;
}

// Central difference of f(x + s*dir) at s = 0 with Richardson extrapolation.
template <class F>
double directional_fd(F f, double step) {
  const auto d = [&](double h) { return (f(h) - f(-h)) / (2.0 * h); };
  return (4.0 * d(step / 2.0) - d(step)) / 3.0;
}

}  // namespace testing
