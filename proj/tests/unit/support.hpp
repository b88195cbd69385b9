#pragma once

#include <random>

#include "finsler/numerics.hpp"

namespace finsler::test {

inline Vec3 random_unit(std::mt19937_64& rng, int dim = 3) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), dim == 3 ? n(rng) : 0.0);
  return v.normalized();
}

inline Vec3 random_tangent(std::mt19937_64& rng, const Vec3& x) {
  Vec3 v = random_unit(rng);
  v -= v.dot(x) * x;
  return v.normalized();
}

}  // namespace finsler::test
