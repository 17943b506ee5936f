#include "groupinf/selftest.hpp"

#include "groupinf/errors.hpp"
#include "groupinf/forward_stepwise.hpp"
#include "groupinf/group_lasso.hpp"
#include "groupinf/iht.hpp"
#include "groupinf/rng.hpp"
#include "groupinf/simulation.hpp"
#include "groupinf/truncated_chi.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace groupinf {

namespace {

constexpr std::uint64_t kSelftestSeed = 20240601;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

double upper_normal(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

CheckResult chi_cdf(const SelftestOptions& opts) {
  QuadratureOptions q;
  q.rel_tol = opts.quad_tol;
  double worst = 0.0;
  for (int k : {1, 2, 3, 5, 10}) {
    boost::math::chi_squared_distribution<double> chi2(k);
    for (double sigma : {0.5, 1.0, 2.0}) {
      for (double z : {0.3, 1.0, 2.0, 3.5}) {
        const RadialProblem problem{k, sigma, z * sigma, IntervalSet::positive_half_line()};
        const double expect = boost::math::cdf(boost::math::complement(chi2, z * z));
        worst = std::max(worst, std::abs(p_value(problem, q) - expect));
      }
    }
  }
  return {"chi_cdf", worst <= 1e-6, "max |p - chi survival| = " + fmt(worst)};
}

CheckResult truncnormal_k1(const SelftestOptions& opts) {
  QuadratureOptions q;
  q.rel_tol = opts.quad_tol;
  Rng rng(derive_seed(kSelftestSeed, streams::kGroupTest, 1));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const double sigma = 0.5 + unif(rng);
    const double a = 3.0 * unif(rng);
    const double b = a + 0.2 + 2.0 * unif(rng);
    const double c = b + 0.2 + unif(rng);
    const IntervalSet region = rep % 2 ? IntervalSet{{a, b}} : IntervalSet{{a, b}, {c, kInf}};
    const double r_obs = a + (b - a) * (0.1 + 0.8 * unif(rng));
    const double t = 2.0 * unif(rng) - 0.5;
    double above = 0.0;
    double total = 0.0;
    for (const Interval& iv : region) {
      auto mass = [&](double lo, double hi) {
        return upper_normal((lo - t) / sigma) - (std::isinf(hi) ? 0.0 : upper_normal((hi - t) / sigma));
      };
      total += mass(iv.lo, iv.hi);
      if (iv.hi > r_obs) above += mass(std::max(iv.lo, r_obs), iv.hi);
    }
    const RadialProblem problem{1, sigma, r_obs, region};
    worst = std::max(worst, std::abs(survival_fraction(problem, t, q) - above / total));
  }
  return {"truncnormal_k1", worst <= 1e-6, "max |f - closed form| = " + fmt(worst)};
}

SimConfig probe_config(SelectorKind kind, double tau) {
  SimConfig c = desk_preset(kind);
  c.tau = tau;
  c.seed = kSelftestSeed;
  return c;
}

CheckResult fs_replay(const SelftestOptions&) {
  const SimConfig cfg = probe_config(SelectorKind::kFs, 1.0);
  int mismatches = 0;
  int probes = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const Trial tr = generate_trial(cfg, derive_seed(cfg.seed, streams::kTrial, trial));
    const FsEvent event = fs_select(tr.design, tr.Y, cfg.selector.fs_steps);
    const int g = event.path.front();
    std::vector<int> control(event.path.begin() + 1, event.path.end());
    const auto dec = decompose(tr.Y, test_subspace(tr.design, event.path, g));
    const IntervalSet region = fs_region(tr.design, tr.Y, event, g, control);
    for (int i = 1; i <= 40; ++i) {
      const double r = 3.0 * dec.R * i / 40.0;
      const bool replay = fs_select(tr.design, dec.at_radius(r), cfg.selector.fs_steps).path == event.path;
      mismatches += replay != region.contains(r);
      ++probes;
    }
  }
  return {"fs_replay", mismatches == 0,
          std::to_string(mismatches) + " mismatches over " + std::to_string(probes) + " probes"};
}

CheckResult iht_replay(const SelftestOptions&) {
  const SimConfig cfg = probe_config(SelectorKind::kIht, 1.0);
  const IhtConfig ic = IhtConfig::constant_step(cfg.selector.iht_k, cfg.selector.iht_T, cfg.selector.iht_eta);
  int mismatches = 0;
  int probes = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const Trial tr = generate_trial(cfg, derive_seed(cfg.seed, streams::kTrial, trial));
    const IhtEvent event = iht_select(tr.design, tr.Y, ic);
    const int g = event.final_model().front();
    const auto dec = decompose(tr.Y, test_subspace(tr.design, event.final_model(), g));
    const IntervalSet region = iht_region(tr.design, tr.Y, event, ic, g);
    for (int i = 1; i <= 40; ++i) {
      const double r = 3.0 * dec.R * i / 40.0;
      const bool replay = iht_select(tr.design, dec.at_radius(r), ic).models == event.models;
      mismatches += replay != region.contains(r);
      ++probes;
    }
  }
  return {"iht_replay", mismatches == 0,
          std::to_string(mismatches) + " mismatches over " + std::to_string(probes) + " probes"};
}

CheckResult is_vs_exact(const SelftestOptions& opts) {
  const SimConfig cfg = probe_config(SelectorKind::kFs, 0.5);
  const Trial tr = generate_trial(cfg, derive_seed(cfg.seed, streams::kTrial, 0));
  const FsEvent event = fs_select(tr.design, tr.Y, cfg.selector.fs_steps);
  const int g = event.path.back();
  std::vector<int> control(event.path.begin(), event.path.end() - 1);
  const auto dec = decompose(tr.Y, test_subspace(tr.design, event.path, g));
  const IntervalSet region = fs_region(tr.design, tr.Y, event, g, control);
  const RadialProblem problem{static_cast<int>(dec.basis.k()), cfg.sigma, dec.R, region};
  const double exact = p_value(problem);
  const auto sample = ImportanceSample::draw([&](double r) -> std::optional<bool> { return region.contains(r); },
                                             problem.k, cfg.sigma, dec.R, 20000,
                                             derive_seed(cfg.seed, streams::kImportance, 0), opts.threads);
  const SampledEstimate est = sample.estimate(0.0);
  const double z = std::abs(est.value - exact) / est.std_error;
  return {"is_vs_exact", z <= 3.0,
          "exact " + fmt(exact) + ", sampled " + fmt(est.value) + " (" + fmt(z) + " standard errors)"};
}

CheckResult glasso_kkt(const SelftestOptions&) {
  SimConfig cfg = probe_config(SelectorKind::kGlasso, 1.0);
  const Trial tr = generate_trial(cfg, derive_seed(cfg.seed, streams::kTrial, 0));
  const GlassoSolver solver(tr.design);
  double worst = 0.0;
  for (double lambda : {0.5, 1.5, 3.0}) {
    const GlassoFit fit = solver.fit_response(tr.Y, lambda);
    worst = std::max(worst, kkt_residual(tr.design, tr.Y, fit.beta, lambda) / fit.scale);
  }
  double lmax = 0.0;
  const Vector Xty = tr.design.X().transpose() * tr.Y;
  for (int g = 0; g < tr.design.num_groups(); ++g) lmax = std::max(lmax, tr.design.group_part(Xty, g).norm());
  const GlassoFit empty = solver.fit_response(tr.Y, lmax);
  const bool ok = worst <= 1e-8 && empty.active.empty() && empty.beta.isZero(0.0);
  return {"glasso_kkt", ok, "max relative KKT residual " + fmt(worst)};
}

using Check = std::function<CheckResult(const SelftestOptions&)>;

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks = {
      {"chi_cdf", chi_cdf},         {"truncnormal_k1", truncnormal_k1}, {"fs_replay", fs_replay},
      {"iht_replay", iht_replay},   {"is_vs_exact", is_vs_exact},       {"glasso_kkt", glasso_kkt},
  };
  return checks;
}

}  // namespace

std::vector<std::string> selftest_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

std::vector<CheckResult> run_selftests(const SelftestOptions& opts, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    const auto& reg = registry();
    if (std::none_of(reg.begin(), reg.end(), [&](const auto& e) { return e.first == n; })) {
      throw ConfigError("only", "unknown check '" + n + "'");
    }
  }
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : registry()) {
    if (!names.empty() && std::find(names.begin(), names.end(), name) == names.end()) continue;
    try {
      out.push_back(fn(opts));
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace groupinf
