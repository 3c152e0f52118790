#pragma once

#include "afp/hadamard.hpp"

#include <initializer_list>
#include <random>

namespace afp::testing {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random tangent vector at x with ambient Gaussian entries projected to T_x.
inline TangentVector random_tangent(const ModelSpace& s, const HyperboloidPoint& x, std::mt19937_64& rng,
                                    double scale = 1.0) {
  std::normal_distribution<double> g;
  Vec v(s.ambient_size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * g(rng);
  return s.tangent(x, v);
}

inline TangentVector unit(const ModelSpace& s, const TangentVector& v) {
  return s.tangent(v.base, v.v / mink_norm(v.v));
}

/// Point at distance <= max_r from the origin.
inline HyperboloidPoint random_point(const ModelSpace& s, std::mt19937_64& rng, double max_r) {
  const TangentVector v = unit(s, random_tangent(s, s.origin(), rng));
  return s.geodesic(v, uniform(rng, 0.0, max_r));
}

}  // namespace afp::testing
