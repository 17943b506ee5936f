#include "groupinf/truncated_chi.hpp"

#include "groupinf/errors.hpp"
#include "groupinf/quadrature.hpp"
#include "groupinf/root_finding.hpp"

#include <algorithm>
#include <cmath>

namespace groupinf {

double log_radial_weight(double r, int k, double sigma, double t) {
  const double quad = -(r * r - 2.0 * r * t) / (2.0 * sigma * sigma);
  if (k == 1) return quad;
  return (k - 1) * std::log(r) + quad;
}

namespace {

// Maximizer of the (concave) log weight over (0, inf).
double radial_mode(int k, double sigma, double t) {
  return 0.5 * (t + std::sqrt(t * t + 4.0 * sigma * sigma * (k - 1)));
}

// On a monotone stretch [from, to] of the log weight, the point where it
// crosses `level`. `from` is the end closer to the mode.
template <typename F>
double bisect_level(const F& lw, double from, double to, double level) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (from + to);
    if (mid == from || mid == to) break;
    if (lw(mid) >= level) {
      from = mid;
    } else {
      to = mid;
    }
  }
  return to;
}

struct IntervalMass {
  double log_scale = 0.0;  // integrals below are of exp(lw - log_scale)
  double below = 0.0;
  double above = 0.0;
  double abs_error = 0.0;
};

IntervalMass integrate_interval(const Interval& iv, const RadialProblem& pr, double t,
                                const QuadratureOptions& opts) {
  auto lw = [&](double r) { return log_radial_weight(r, pr.k, pr.sigma, t); };
  const double mode = radial_mode(pr.k, pr.sigma, t);
  const double peak = std::clamp(mode, iv.lo, iv.hi);

  IntervalMass mass;
  mass.log_scale = lw(peak);
  const double level = mass.log_scale - std::min(opts.log_drop, -2.0 * std::log(opts.rel_tol));

  double a = iv.lo;
  if (peak > iv.lo && !(lw(iv.lo) >= level)) a = bisect_level(lw, peak, iv.lo, level);

  double b = iv.hi;
  if (std::isinf(b)) {
    double step = std::max({pr.sigma, std::abs(peak), 1e-300});
    b = peak + step;
    while (lw(b) >= level) {
      step *= 2.0;
      b = peak + step;
    }
    b = bisect_level(lw, peak, b, level);
  } else if (peak < iv.hi && !(lw(iv.hi) >= level)) {
    b = bisect_level(lw, peak, iv.hi, level);
  }

  auto integrand = [&](double r) { return std::exp(lw(r) - mass.log_scale); };
  const double split = std::clamp(pr.r_obs, a, b);
  if (split > a) {
    const QuadratureResult q = integrate_adaptive(integrand, a, split, opts.rel_tol);
    mass.below = q.value;
    mass.abs_error += q.abs_error;
  }
  if (b > split) {
    const QuadratureResult q = integrate_adaptive(integrand, split, b, opts.rel_tol);
    mass.above = q.value;
    mass.abs_error += q.abs_error;
  }
  return mass;
}

}  // namespace

SurvivalValue survival_fraction_detailed(const RadialProblem& problem, double t,
                                         const QuadratureOptions& opts) {
  if (problem.region.empty()) throw NumericalError("survival fraction of an empty region");

  std::vector<IntervalMass> masses;
  masses.reserve(problem.region.size());
  double top = -kInf;
  for (const Interval& iv : problem.region) {
    masses.push_back(integrate_interval(iv, problem, t, opts));
    top = std::max(top, masses.back().log_scale);
  }

  double below = 0.0;
  double above = 0.0;
  double err = 0.0;
  for (const IntervalMass& m : masses) {
    const double scale = std::exp(m.log_scale - top);
    below += scale * m.below;
    above += scale * m.above;
    err += scale * m.abs_error;
  }
  const double total = below + above;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericalError("radial density integrals underflowed on region " +
                         problem.region.to_string());
  }
  return SurvivalValue{above / total, err / total};
}

double survival_fraction(const RadialProblem& problem, double t, const QuadratureOptions& opts) {
  return survival_fraction_detailed(problem, t, opts).value;
}

double p_value(const RadialProblem& problem, const QuadratureOptions& opts) {
  return survival_fraction(problem, 0.0, opts);
}

namespace {

double lower_bound_from(const RadialProblem& problem, double alpha, double f0,
                        const QuadratureOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  MonotoneRootOptions ropts;
  ropts.initial_step = problem.sigma;
  auto f = [&](double t) { return survival_fraction(problem, t, opts); };
  return solve_increasing(f, alpha, f0, ropts);
}

}  // namespace

double lower_bound(const RadialProblem& problem, double alpha, const QuadratureOptions& opts) {
  return lower_bound_from(problem, alpha, p_value(problem, opts), opts);
}

std::pair<double, double> two_sided_interval(const RadialProblem& problem, double alpha,
                                             const QuadratureOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  const double f0 = p_value(problem, opts);
  return {lower_bound_from(problem, 0.5 * alpha, f0, opts),
          lower_bound_from(problem, 1.0 - 0.5 * alpha, f0, opts)};
}

InferenceResult infer_explicit(const RadialProblem& problem, const InferenceOptions& opts) {
  if (!problem.region.contains(problem.r_obs)) {
    throw NumericalError("observed radius " + std::to_string(problem.r_obs) +
                         " lies outside its truncation region " + problem.region.to_string());
  }
  InferenceResult res;
  res.k = problem.k;
  res.r_obs = problem.r_obs;
  res.alpha = opts.alpha;
  const SurvivalValue f0 = survival_fraction_detailed(problem, 0.0, opts.quadrature);
  res.p_value = f0.value;
  res.diagnostics.quadrature_rel_error = f0.rel_error;
  res.lower_bound = lower_bound_from(problem, opts.alpha, f0.value, opts.quadrature);
  if (opts.two_sided) {
    res.two_sided = {lower_bound_from(problem, 0.5 * opts.alpha, f0.value, opts.quadrature),
                     lower_bound_from(problem, 1.0 - 0.5 * opts.alpha, f0.value, opts.quadrature)};
  }
  res.region = problem.region;
  return res;
}

}  // namespace groupinf
