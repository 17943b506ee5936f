#include "groupinf/simulation.hpp"

#include "groupinf/errors.hpp"
#include "groupinf/group_lasso.hpp"
#include "groupinf/iht.hpp"
#include "groupinf/parallel.hpp"
#include "groupinf/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

namespace groupinf {

std::string to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::kFs: return "fs";
    case SelectorKind::kIht: return "iht";
    case SelectorKind::kGlasso: return "glasso";
  }
  return "?";
}

SelectorKind parse_selector(const std::string& name) {
  if (name == "fs") return SelectorKind::kFs;
  if (name == "iht") return SelectorKind::kIht;
  if (name == "glasso") return SelectorKind::kGlasso;
  throw ConfigError("selector", "unknown selector '" + name + "' (expected fs, iht or glasso)");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void SimConfig::validate() const {
  if (n < 2) throw ConfigError("n", "n must be at least 2");
  if (G < 1) throw ConfigError("G", "G must be at least 1");
  if (group_size < 1) throw ConfigError("group-size", "group size must be at least 1");
  if (s < 0 || s > G) throw ConfigError("s", "s must lie in [0, G]");
  if (!std::isfinite(tau)) throw ConfigError("tau", "tau must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma", "sigma must be positive");
  if (trials < 1) throw ConfigError("trials", "trials must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  if (threads < 1) throw ConfigError("threads", "threads must be at least 1");
  switch (selector.kind) {
    case SelectorKind::kFs:
      if (selector.fs_steps < 1 || selector.fs_steps > G) {
        throw ConfigError("steps", "FS steps must lie in [1, G]");
      }
      break;
    case SelectorKind::kIht:
      if (selector.iht_k < 1 || selector.iht_k > G) throw ConfigError("k", "IHT k must lie in [1, G]");
      if (selector.iht_T < 1) throw ConfigError("iterations", "IHT needs at least one iteration");
      if (!(selector.iht_eta > 0.0)) throw ConfigError("eta", "eta must be positive");
      break;
    case SelectorKind::kGlasso:
      if (!(selector.glasso_lambda > 0.0)) throw ConfigError("lambda", "lambda must be positive");
      if (selector.B < 1) throw ConfigError("B", "B must be at least 1");
      break;
  }
}

std::vector<std::string> SimConfig::describe() const {
  std::vector<std::string> out = {
      "selector=" + to_string(selector.kind),
      "n=" + std::to_string(n),
      "G=" + std::to_string(G),
      "group_size=" + std::to_string(group_size),
      "s=" + std::to_string(s),
      "tau=" + format_double(tau),
      "sigma=" + format_double(sigma),
      "trials=" + std::to_string(trials),
      "alpha=" + format_double(alpha),
      "seed=" + std::to_string(seed),
  };
  switch (selector.kind) {
    case SelectorKind::kFs:
      out.push_back("steps=" + std::to_string(selector.fs_steps));
      out.push_back(std::string("fs_mode=") +
                    (selector.fs_mode == FsMode::kSimultaneous ? "simultaneous" : "sequential"));
      break;
    case SelectorKind::kIht:
      out.push_back("k=" + std::to_string(selector.iht_k));
      out.push_back("iterations=" + std::to_string(selector.iht_T));
      out.push_back("eta=" + format_double(selector.iht_eta));
      break;
    case SelectorKind::kGlasso:
      out.push_back("lambda=" + format_double(selector.glasso_lambda));
      out.push_back("B=" + std::to_string(selector.B));
      break;
  }
  return out;
}

SimConfig desk_preset(SelectorKind kind) {
  SimConfig c;
  c.selector.kind = kind;
  return c;
}

SimConfig paper_preset(SelectorKind kind) {
  SimConfig c;
  c.n = 500;
  c.G = 50;
  c.group_size = 10;
  c.s = 5;
  c.tau = 1.5;
  c.sigma = 1.0;
  c.trials = 200;
  c.alpha = 0.1;
  c.selector.kind = kind;
  c.selector.fs_steps = 10;
  c.selector.fs_mode = FsMode::kSimultaneous;
  c.selector.iht_k = 10;
  c.selector.iht_T = 5;
  c.selector.iht_eta = 2.0;
  c.selector.glasso_lambda = 4.0;
  return c;
}

Trial generate_trial(const SimConfig& config, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index n = config.n;
  const Index p = static_cast<Index>(config.G) * config.group_size;
  const double col_sd = 1.0 / std::sqrt(static_cast<double>(n));

  Matrix X(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) X(i, j) = col_sd * normal(rng);
  }
  Trial t;
  t.beta = Vector::Zero(p);
  t.beta.head(static_cast<Index>(config.s) * config.group_size).setConstant(config.tau);
  t.mu = X * t.beta;
  t.Y = t.mu;
  for (Index i = 0; i < n; ++i) t.Y(i) += config.sigma * normal(rng);
  t.design = GroupedDesign::contiguous(std::move(X), config.group_size);
  return t;
}

std::vector<TrialRecord> run_trial(const SimConfig& config, int trial_index) {
  const std::uint64_t trial_seed =
      derive_seed(config.seed, streams::kTrial, static_cast<std::uint64_t>(trial_index));
  const Trial trial = generate_trial(config, trial_seed);

  InferenceOptions opts;
  opts.alpha = config.alpha;
  std::vector<InferenceResult> results;
  const SelectorConfig& sel = config.selector;
  switch (sel.kind) {
    case SelectorKind::kFs: {
      const FsEvent event = fs_select(trial.design, trial.Y, sel.fs_steps);
      results = fs_infer_event(trial.design, trial.Y, event, config.sigma, opts, sel.fs_mode);
      break;
    }
    case SelectorKind::kIht:
      results = iht_infer(trial.design, trial.Y,
                          IhtConfig::constant_step(sel.iht_k, sel.iht_T, sel.iht_eta), config.sigma,
                          opts);
      break;
    case SelectorKind::kGlasso: {
      auto solver = std::make_shared<const GlassoSolver>(trial.design);
      const GlassoFit fit = solver->fit_response(trial.Y, sel.glasso_lambda);
      if (fit.active.empty()) return {};
      GlassoInferenceOptions gopts;
      gopts.B = sel.B;
      gopts.seed = derive_seed(trial_seed, streams::kImportance, 0);
      results = glasso_infer_fit(solver, trial.Y, fit, config.sigma, opts, gopts);
      break;
    }
  }

  std::vector<TrialRecord> out;
  for (const InferenceResult& res : results) {
    const ProjectionDecomposition& dec = res.decomposition;
    TrialRecord rec;
    rec.trial = trial_index;
    rec.group = res.group;
    rec.is_null = res.group >= config.s || config.tau == 0.0;
    rec.p = res.p_value;
    rec.L_alpha = res.lower_bound;
    rec.truth_norm = (dec.basis.V.transpose() * trial.mu).norm();
    rec.truth_inner = dec.U.dot(trial.mu);
    rec.p_std_error = res.diagnostics.p_value_std_error;
    rec.rank_stat = kNaN;
    if (res.region) {
      const RadialProblem problem{static_cast<int>(res.k), config.sigma, res.r_obs, *res.region};
      rec.rank_stat = survival_fraction(problem, rec.truth_inner);
    }
    out.push_back(rec);
  }
  return out;
}

SimReport run_simulation(const SimConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<std::vector<TrialRecord>> per_trial(count);
  std::vector<std::string> errors(count);
  std::vector<char> failed(count, 0);
  parallel_for(count, config.threads, [&](std::size_t i) {
    try {
      per_trial[i] = run_trial(config, static_cast<int>(i));
    } catch (const Error& e) {
      failed[i] = 1;
      errors[i] = e.what();
    }
  });

  SimReport report;
  report.config = config;
  for (std::size_t i = 0; i < count; ++i) {
    if (failed[i]) {
      report.failures.push_back({static_cast<int>(i), errors[i]});
      continue;
    }
    if (per_trial[i].empty()) ++report.empty_selections;
    report.records.insert(report.records.end(), per_trial[i].begin(), per_trial[i].end());
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<double> SimReport::null_pvalues() const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.is_null) out.push_back(r.p);
  }
  return out;
}

std::vector<double> SimReport::signal_pvalues() const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!r.is_null) out.push_back(r.p);
  }
  return out;
}

std::vector<double> SimReport::rank_statistics() const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!std::isnan(r.rank_stat)) out.push_back(r.rank_stat);
  }
  return out;
}

Coverage SimReport::coverage(bool null_groups) const {
  Coverage c;
  for (const auto& r : records) {
    if (r.is_null != null_groups) continue;
    ++c.count;
    if (r.L_alpha <= r.truth_norm) ++c.covered_norm;
    if (r.L_alpha <= r.truth_inner) ++c.covered_inner;
  }
  return c;
}

std::size_t SimReport::superset_violations() const {
  std::size_t v = 0;
  for (const auto& r : records) {
    if (r.L_alpha <= r.truth_inner && !(r.L_alpha <= r.truth_norm)) ++v;
  }
  return v;
}

std::size_t SimReport::sign_violations() const {
  std::size_t v = 0;
  for (const auto& r : records) {
    if ((r.p < config.alpha) != (r.L_alpha > 0.0)) ++v;
  }
  return v;
}

KsResult ks_uniformity(std::span<const double> values, double level) {
  KsResult res;
  res.n = values.size();
  if (values.empty()) return res;
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const double N = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = std::clamp(x[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / N - u, u - static_cast<double>(i) / N});
  }
  res.statistic = d;
  res.critical = std::sqrt(-std::log(level / 2.0) / 2.0) / std::sqrt(N);
  res.pass = d <= res.critical;
  return res;
}

void write_records_csv(std::ostream& os, const SimReport& report) {
  for (const auto& line : report.config.describe()) os << "# " << line << '\n';
  os << "trial,group,is_null,p,L_alpha,truth_norm,truth_inner\n";
  for (const auto& r : report.records) {
    os << r.trial << ',' << r.group << ',' << (r.is_null ? 1 : 0) << ',' << format_double(r.p)
       << ',' << format_double(r.L_alpha) << ',' << format_double(r.truth_norm) << ','
       << format_double(r.truth_inner) << '\n';
  }
}

void write_summary(std::ostream& os, const SimReport& report) {
  for (const auto& line : report.config.describe()) os << "# " << line << '\n';
  os << "trials_completed=" << (report.config.trials - static_cast<int>(report.failures.size()))
     << '\n';
  os << "trials_failed=" << report.failures.size() << '\n';
  for (const auto& f : report.failures) os << "  trial " << f.trial << ": " << f.message << '\n';
  os << "trials_empty_selection=" << report.empty_selections << '\n';
  os << "tested_groups=" << report.records.size() << '\n';

  const auto nulls = report.null_pvalues();
  const KsResult ks = ks_uniformity(nulls);
  os << "null_tested=" << nulls.size() << '\n';
  if (!nulls.empty()) {
    os << "null_ks_statistic=" << format_double(ks.statistic) << '\n';
    os << "null_ks_critical_1pct=" << format_double(ks.critical) << '\n';
    os << "null_ks_pass=" << (ks.pass ? "yes" : "no") << '\n';
  }
  const auto ranks = report.rank_statistics();
  if (!ranks.empty()) {
    const KsResult rk = ks_uniformity(ranks);
    os << "rank_ks_statistic=" << format_double(rk.statistic) << '\n';
    os << "rank_ks_pass=" << (rk.pass ? "yes" : "no") << '\n';
  }
  const auto signal = report.signal_pvalues();
  if (!signal.empty()) {
    std::vector<double> sorted = signal;
    std::sort(sorted.begin(), sorted.end());
    os << "signal_tested=" << signal.size() << '\n';
    const std::size_t m = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    os << "signal_median_p=" << format_double(median) << '\n';
  }
  for (bool null_groups : {false, true}) {
    const Coverage c = report.coverage(null_groups);
    if (c.count == 0) continue;
    const char* tag = null_groups ? "null" : "signal";
    os << tag << "_coverage_inner=" << format_double(c.inner_rate()) << '\n';
    os << tag << "_coverage_norm=" << format_double(c.norm_rate()) << '\n';
  }
  os << "sign_violations=" << report.sign_violations() << '\n';
}

}  // namespace groupinf
