#pragma once

#include "groupinf/interval_set.hpp"
#include "groupinf/projections.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace groupinf {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct QuadratureOptions {
  double rel_tol = 1e-9;
  // Integration windows stop where the weight falls below rel_tol^2 of its
  // maximum over the interval, or log_drop log-units below it if that is less.
  double log_drop = 45.0;
};

/// Conditional law of ||P_L Y|| given the direction, the orthogonal
/// complement and the selection event, on an explicit truncation region.
struct RadialProblem {
  int k = 1;
  double sigma = 1.0;
  double r_obs = 1.0;
  IntervalSet region = IntervalSet::positive_half_line();
};

struct InferenceDiagnostics {
  double quadrature_rel_error = kNaN;
  double effective_sample_size = kNaN;
  int samples = 0;
  int oracle_failures = 0;
  double p_value_std_error = kNaN;
  double lower_bound_std_error = kNaN;
};

/// Selective inference output for one tested group.
struct InferenceResult {
  int group = -1;
  Index k = 0;
  double r_obs = kNaN;
  double alpha = kNaN;
  double p_value = kNaN;
  double lower_bound = kNaN;
  // Interval for <dir_L(Y), mu>; it is not an interval for ||P_L mu||.
  std::optional<std::pair<double, double>> two_sided;
  InferenceDiagnostics diagnostics;
  // Set for selectors with an explicit truncation region.
  std::optional<IntervalSet> region;
  ProjectionDecomposition decomposition;
};

/// (k - 1) log r - (r^2 - 2 r t) / (2 sigma^2).
double log_radial_weight(double r, int k, double sigma, double t);

struct SurvivalValue {
  double value = kNaN;
  double rel_error = kNaN;
};

/// f_Y(t): mass of the tilted radial density above r_obs within the region.
/// Throws NumericalError if both integrals vanish.
SurvivalValue survival_fraction_detailed(const RadialProblem& problem, double t,
                                         const QuadratureOptions& opts = {});

double survival_fraction(const RadialProblem& problem, double t,
                         const QuadratureOptions& opts = {});

/// f_Y(0).
double p_value(const RadialProblem& problem, const QuadratureOptions& opts = {});

/// Unique t with f_Y(t) = alpha.
double lower_bound(const RadialProblem& problem, double alpha, const QuadratureOptions& opts = {});

/// (L_{alpha/2}, L_{1 - alpha/2}).
std::pair<double, double> two_sided_interval(const RadialProblem& problem, double alpha,
                                             const QuadratureOptions& opts = {});

struct InferenceOptions {
  double alpha = 0.1;
  bool two_sided = false;
  QuadratureOptions quadrature{};
};

/// p-value, lower bound and (optionally) two-sided interval in one call.
InferenceResult infer_explicit(const RadialProblem& problem, const InferenceOptions& opts);

// ---------------------------------------------------------------------------
// Importance-sampled variant for regions known only through membership.

/// Membership test r -> (r in R_Y). An empty optional marks a failed
/// evaluation; such samples are discarded and counted.
using RadiusOracle = std::function<std::optional<bool>(double)>;

struct SampledEstimate {
  double value = kNaN;
  double std_error = kNaN;
  double effective_sample_size = kNaN;
  // d f_hat / dt, used to propagate the standard error to the lower bound.
  double derivative = kNaN;
};

/// Fixed draw r_1..r_B ~ Normal(r_obs, sigma^2) with the oracle evaluated
/// once per draw. f_hat(t) is then a deterministic, strictly increasing
/// function of t.
class ImportanceSample {
public:
  static constexpr double kMinEffectiveSampleSize = 10.0;

  static ImportanceSample draw(const RadiusOracle& oracle, int k, double sigma, double r_obs,
                               int B, std::uint64_t seed, int threads = 1);

  /// Throws DegenerateSampleError when the effective sample size of the
  /// in-region weights is below kMinEffectiveSampleSize.
  SampledEstimate estimate(double t) const;
  double survival(double t) const { return estimate(t).value; }
  double lower_bound(double alpha) const;

  int k() const { return k_; }
  double sigma() const { return sigma_; }
  double r_obs() const { return r_obs_; }
  int draws() const { return static_cast<int>(radius_.size()); }
  int in_region() const { return static_cast<int>(in_region_.size()); }
  int oracle_failures() const { return failures_; }
  std::span<const double> radii() const { return radius_; }

private:
  SampledEstimate evaluate(double t, bool with_error) const;

  int k_ = 1;
  double sigma_ = 1.0;
  double r_obs_ = 1.0;
  int failures_ = 0;
  std::vector<double> radius_;  // every draw, including non-positive ones
  // Retained in-region positive draws: radius, log(chi_k density / proposal), above r_obs.
  std::vector<double> in_region_;
  std::vector<double> log_ratio_;
  std::vector<char> above_;
};

SampledEstimate sampled_survival_fraction(const RadiusOracle& oracle, int k, double sigma,
                                          double r_obs, double t, int B, std::uint64_t seed);

double sampled_lower_bound(const RadiusOracle& oracle, int k, double sigma, double r_obs,
                           double alpha, int B, std::uint64_t seed);

/// p-value and lower bound from one shared sample set.
InferenceResult infer_sampled(const ImportanceSample& sample, const InferenceOptions& opts);

}  // namespace groupinf
