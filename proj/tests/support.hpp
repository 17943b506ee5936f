#pragma once

// Generators and brute-force oracles shared by the unit and acceptance tests.

#include "groupinf/projections.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testsupport {

using groupinf::GroupedDesign;
using groupinf::Index;
using groupinf::Matrix;
using groupinf::Vector;

inline Matrix normal_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
  }
  return M;
}

inline Vector normal_vector(std::mt19937_64& rng, Index n, double sd = 1.0) {
  return normal_matrix(rng, n, 1, sd).col(0);
}

inline GroupedDesign random_design(std::mt19937_64& rng, Index n, int G, Index size) {
  return GroupedDesign::contiguous(normal_matrix(rng, n, G * size, 1.0 / std::sqrt(double(n))), size);
}

inline double upper_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Closed-form truncated normal survival for k = 1: density of N(t, sigma^2)
// restricted to `region`, mass above r_obs.
template <typename Region>
double truncnorm_survival(const Region& region, double r_obs, double sigma, double t) {
  double above = 0.0;
  double total = 0.0;
  for (const auto& iv : region) {
    auto mass = [&](double lo, double hi) {
      return upper_normal((lo - t) / sigma) - (std::isinf(hi) ? 0.0 : upper_normal((hi - t) / sigma));
    };
    total += mass(iv.lo, iv.hi);
    if (iv.hi > r_obs) above += mass(std::max(iv.lo, r_obs), iv.hi);
  }
  return above / total;
}

// Composite Simpson in long double on a fixed fine grid, truncated at
// `upper`; an independent check of the adaptive quadrature.
template <typename Region>
double simpson_survival(const Region& region, double r_obs, int k, double sigma, double t,
                        double upper, int panels = 200000) {
  auto dens = [&](long double r) -> long double {
    if (r <= 0) return 0;
    return std::exp((k - 1) * std::log(r) - (r * r - 2 * r * t) / (2.0L * sigma * sigma));
  };
  long double above = 0;
  long double total = 0;
  for (const auto& iv : region) {
    const long double lo = iv.lo;
    const long double hi = std::isinf(iv.hi) ? upper : std::min<double>(iv.hi, upper);
    if (hi <= lo) continue;
    auto simpson = [&](long double a, long double b) {
      if (b <= a) return 0.0L;
      const long double h = (b - a) / panels;
      long double s = dens(a) + dens(b);
      for (int i = 1; i < panels; ++i) s += dens(a + i * h) * (i % 2 ? 4 : 2);
      return s * h / 3;
    };
    const long double split = std::clamp<long double>(r_obs, lo, hi);
    const long double below_part = simpson(lo, split);
    const long double above_part = simpson(split, hi);
    total += below_part + above_part;
    above += above_part;
  }
  return static_cast<double>(above / total);
}

}  // namespace testsupport
