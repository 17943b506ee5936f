#include "groupinf/errors.hpp"
#include "groupinf/parallel.hpp"
#include "groupinf/rng.hpp"
#include "groupinf/root_finding.hpp"
#include "groupinf/truncated_chi.hpp"

#include <algorithm>
#include <cmath>

namespace groupinf {

ImportanceSample ImportanceSample::draw(const RadiusOracle& oracle, int k, double sigma,
                                        double r_obs, int B, std::uint64_t seed, int threads) {
  if (B < 1) throw ConfigError("B", "sample count must be at least 1");
  if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");

  ImportanceSample s;
  s.k_ = k;
  s.sigma_ = sigma;
  s.r_obs_ = r_obs;

  Rng rng(seed);
  std::normal_distribution<double> proposal(r_obs, sigma);
  s.radius_.resize(static_cast<std::size_t>(B));
  for (double& r : s.radius_) r = proposal(rng);

  // 1 = in region, 0 = outside, -1 = oracle failure, 2 = non-positive (zero weight).
  std::vector<signed char> status(s.radius_.size(), 2);
  parallel_for(s.radius_.size(), threads, [&](std::size_t i) {
    const double r = s.radius_[i];
    if (!(r > 0.0)) return;
    const std::optional<bool> inside = oracle(r);
    status[i] = inside.has_value() ? static_cast<signed char>(*inside) : -1;
  });

  const double two_var = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < s.radius_.size(); ++i) {
    if (status[i] == -1) ++s.failures_;
    if (status[i] != 1) continue;
    const double r = s.radius_[i];
    // log of sigma*chi_k density over the Normal(r_obs, sigma^2) density, up
    // to a constant shared by every draw.
    const double dev = r - r_obs;
    const double log_ratio =
        (k > 1 ? (k - 1) * std::log(r) : 0.0) - r * r / two_var + dev * dev / two_var;
    s.in_region_.push_back(r);
    s.log_ratio_.push_back(log_ratio);
    s.above_.push_back(r > r_obs ? 1 : 0);
  }
  return s;
}

SampledEstimate ImportanceSample::estimate(double t) const {
  SampledEstimate est = evaluate(t, true);
  if (!(est.effective_sample_size >= kMinEffectiveSampleSize)) {
    throw DegenerateSampleError("importance-sampling effective sample size " +
                                std::to_string(est.effective_sample_size) +
                                " is below the minimum; increase B");
  }
  return est;
}

SampledEstimate ImportanceSample::evaluate(double t, bool with_error) const {
  const std::size_t m = in_region_.size();
  const double inv_var = 1.0 / (sigma_ * sigma_);
  if (m == 0) {
    throw DegenerateSampleError("no importance sample fell inside the selection event; increase B");
  }

  double top = -kInf;
  for (std::size_t i = 0; i < m; ++i) top = std::max(top, log_ratio_[i] + in_region_[i] * t * inv_var);

  double sum_w = 0.0;
  double sum_w2 = 0.0;
  double sum_wa = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::exp(log_ratio_[i] + in_region_[i] * t * inv_var - top);
    sum_w += w;
    sum_w2 += w * w;
    if (above_[i]) sum_wa += w;
  }

  SampledEstimate est;
  est.effective_sample_size = sum_w * sum_w / sum_w2;
  est.value = sum_wa / sum_w;
  if (!with_error) return est;

  double var = 0.0;
  double slope = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::exp(log_ratio_[i] + in_region_[i] * t * inv_var - top) / sum_w;
    const double resid = (above_[i] ? 1.0 : 0.0) - est.value;
    var += w * w * resid * resid;
    slope += w * in_region_[i] * resid;
  }
  est.std_error = std::sqrt(var);
  est.derivative = slope * inv_var;
  return est;
}

double ImportanceSample::lower_bound(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  const bool any_above = std::any_of(above_.begin(), above_.end(), [](char a) { return a != 0; });
  const bool any_below = std::any_of(above_.begin(), above_.end(), [](char a) { return a == 0; });
  if (!any_above || !any_below) {
    throw DegenerateSampleError(
        "importance sample has in-region draws on only one side of the observed radius; "
        "increase B");
  }
  MonotoneRootOptions ropts;
  ropts.initial_step = sigma_;
  // The bracket search may pass through tilts where few draws carry the
  // weight; only the root itself is held to the sample-size floor.
  auto f = [&](double t) { return evaluate(t, false).value; };
  const double root = solve_increasing(f, alpha, f(0.0), ropts);
  (void)estimate(root);
  return root;
}

SampledEstimate sampled_survival_fraction(const RadiusOracle& oracle, int k, double sigma,
                                          double r_obs, double t, int B, std::uint64_t seed) {
  return ImportanceSample::draw(oracle, k, sigma, r_obs, B, seed).estimate(t);
}

double sampled_lower_bound(const RadiusOracle& oracle, int k, double sigma, double r_obs,
                           double alpha, int B, std::uint64_t seed) {
  return ImportanceSample::draw(oracle, k, sigma, r_obs, B, seed).lower_bound(alpha);
}

InferenceResult infer_sampled(const ImportanceSample& sample, const InferenceOptions& opts) {
  InferenceResult res;
  res.k = sample.k();
  res.r_obs = sample.r_obs();
  res.alpha = opts.alpha;

  const SampledEstimate at_zero = sample.estimate(0.0);
  res.p_value = at_zero.value;
  res.lower_bound = sample.lower_bound(opts.alpha);
  if (opts.two_sided) {
    res.two_sided = {sample.lower_bound(0.5 * opts.alpha), sample.lower_bound(1.0 - 0.5 * opts.alpha)};
  }

  const SampledEstimate at_bound = sample.estimate(res.lower_bound);
  res.diagnostics.samples = sample.draws();
  res.diagnostics.oracle_failures = sample.oracle_failures();
  res.diagnostics.effective_sample_size = at_zero.effective_sample_size;
  res.diagnostics.p_value_std_error = at_zero.std_error;
  res.diagnostics.lower_bound_std_error =
      at_bound.derivative > 0.0 ? at_bound.std_error / at_bound.derivative : kInf;
  return res;
}

}  // namespace groupinf
