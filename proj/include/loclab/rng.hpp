#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "loclab/types.hpp"

namespace loclab {

// deterministic draws on top of mt19937_64; avoids std::uniform_real_distribution
// whose output is not pinned across standard library implementations
struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; draws two uniforms per call, no caching so the stream is position-independent
  double gaussian() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Complex gaussian_c() {
    double re = gaussian();
    double im = gaussian();
    return Complex(re, im);
  }

  // Haar-random unit vector
  Vector haar_state(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian_c();
    v /= v.norm();
    return v;
  }

  // Haar-random unit vector inside span(Q) for isometric Q (dim x r)
  Vector haar_state_in(const Matrix& Q) {
    Vector c(Q.cols());
    for (int i = 0; i < Q.cols(); ++i) c[i] = gaussian_c();
    Vector v = Q * c;
    v /= v.norm();
    return v;
  }
};

}  // namespace loclab
