#pragma once

#include "groupinf/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace groupinf {

struct MonotoneRootOptions {
  double initial_step = 1.0;
  int max_doublings = 200;
  double rel_width = 1e-10;
  std::uintmax_t max_iterations = 300;
};

/// Solves f(t) = target for strictly increasing f, given f0 = f(0).
///
/// The bracket always has 0 as one endpoint until expansion moves past it,
/// so the sign of the returned root agrees exactly with sign(target - f0):
/// f0 < target gives t > 0, f0 > target gives t < 0, equality gives 0.
template <typename F>
double solve_increasing(const F& f, double target, double f0, const MonotoneRootOptions& opts) {
  if (f0 == target) return 0.0;

  double lo = 0.0;
  double hi = 0.0;
  double f_lo = f0;
  double f_hi = f0;
  double step = opts.initial_step;
  int doublings = 0;
  if (f0 < target) {
    hi = step;
    f_hi = f(hi);
    while (f_hi < target) {
      if (++doublings > opts.max_doublings) {
        throw BracketError("root bracket expansion failed after " +
                           std::to_string(opts.max_doublings) + " doublings");
      }
      lo = hi;
      f_lo = f_hi;
      step *= 2.0;
      hi = lo + step;
      f_hi = f(hi);
    }
    if (f_hi == target) return hi;
  } else {
    lo = -step;
    f_lo = f(lo);
    while (f_lo > target) {
      if (++doublings > opts.max_doublings) {
        throw BracketError("root bracket expansion failed after " +
                           std::to_string(opts.max_doublings) + " doublings");
      }
      hi = lo;
      f_hi = f_lo;
      step *= 2.0;
      lo = hi - step;
      f_lo = f(lo);
    }
    if (f_lo == target) return lo;
  }

  auto g = [&](double t) { return f(t) - target; };
  auto done = [&](double a, double b) {
    return std::abs(b - a) <= opts.rel_width * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  std::uintmax_t iters = opts.max_iterations;
  const auto [a, b] =
      boost::math::tools::toms748_solve(g, lo, hi, f_lo - target, f_hi - target, done, iters);
  // Midpoint of a bracket that has 0 as an endpoint stays strictly on one side.
  double root = 0.5 * (a + b);
  if (lo == 0.0 && root <= 0.0) root = b;
  if (hi == 0.0 && root >= 0.0) root = a;
  return root;
}

}  // namespace groupinf
