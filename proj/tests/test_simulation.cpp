#include "groupinf/errors.hpp"
#include "groupinf/rng.hpp"
#include "groupinf/simulation.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace groupinf;

TEST_SUITE("simulation") {

TEST_CASE("KS statistic on hand-computed inputs") {
  const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  CHECK(ks_uniformity(grid).statistic == doctest::Approx(0.1).epsilon(1e-12));
  const std::vector<double> halves(20, 0.5);
  CHECK(ks_uniformity(halves).statistic == doctest::Approx(0.5));
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ud;
  std::vector<double> u(10000);
  for (auto& x : u) x = ud(rng);
  const KsResult r = ks_uniformity(u);
  CHECK(r.pass);
  CHECK(r.critical == doctest::Approx(1.6276 / 100.0).epsilon(1e-3));
  std::vector<double> skewed(2000);
  for (auto& x : skewed) x = std::pow(ud(rng), 2.0);
  CHECK_FALSE(ks_uniformity(skewed).pass);
}

TEST_CASE("trial generation") {
  SimConfig cfg = desk_preset(SelectorKind::kFs);
  cfg.tau = 0.0;
  const Trial t0 = generate_trial(cfg, 1);
  CHECK(t0.mu.isZero(0.0));
  CHECK(t0.design.num_groups() == 10);
  CHECK(t0.design.p() == 30);

  cfg.tau = 1.5;
  const Trial t1 = generate_trial(cfg, 2);
  CHECK(t1.beta.head(6).isConstant(1.5));
  CHECK(t1.beta.tail(24).isZero(0.0));
  CHECK((t1.mu - t1.design.X() * t1.beta).norm() < 1e-12);

  // Entry variance 1/n pooled over trials.
  double sum = 0.0;
  double count = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Trial t = generate_trial(cfg, derive_seed(9, streams::kTrial, i));
    sum += t.design.X().squaredNorm();
    count += static_cast<double>(t.design.X().size());
  }
  const double var = sum / count;
  CHECK(var == doctest::Approx(1.0 / cfg.n).epsilon(0.02));
  CHECK(generate_trial(cfg, 5).Y == generate_trial(cfg, 5).Y);
}

TEST_CASE("presets") {
  const SimConfig p = paper_preset(SelectorKind::kIht);
  CHECK(p.n == 500);
  CHECK(p.G == 50);
  CHECK(p.group_size == 10);
  CHECK(p.s == 5);
  CHECK(p.selector.iht_k == 10);
  CHECK(p.selector.iht_T == 5);
  CHECK(p.selector.iht_eta == 2.0);
  CHECK(p.selector.fs_steps == 10);
  CHECK(p.selector.glasso_lambda == 4.0);
  const SimConfig d = desk_preset(SelectorKind::kFs);
  CHECK(d.n == 100);
  CHECK(d.G == 10);
  CHECK(d.group_size == 3);
  CHECK(d.s == 2);
  CHECK(d.trials == 500);
  CHECK(d.selector.fs_steps == 3);
}

TEST_CASE("validation names the offending field") {
  SimConfig c = desk_preset(SelectorKind::kIht);
  c.s = 11;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.option() == "s");
  }
  c = desk_preset(SelectorKind::kIht);
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_selector("lasso"), ConfigError);
}

TEST_CASE("run is deterministic and thread-count independent") {
  for (SelectorKind kind : {SelectorKind::kFs, SelectorKind::kIht}) {
    SimConfig cfg = desk_preset(kind);
    cfg.trials = 40;
    cfg.tau = 1.0;
    cfg.seed = 7;
    cfg.threads = 1;
    const SimReport a = run_simulation(cfg);
    cfg.threads = 3;
    const SimReport b = run_simulation(cfg);
    std::ostringstream sa, sb, qa, qb;
    write_records_csv(sa, a);
    write_records_csv(sb, b);
    write_summary(qa, a);
    write_summary(qb, b);
    CHECK(sa.str() == sb.str());
    CHECK(qa.str() == qb.str());
    CHECK(sa.str().find("trial,group,is_null,p,L_alpha,truth_norm,truth_inner\n") != std::string::npos);
    CHECK(sa.str().rfind("# selector=", 0) == 0);
  }
}

TEST_CASE("record invariants") {
  SimConfig cfg = desk_preset(SelectorKind::kFs);
  cfg.trials = 60;
  cfg.tau = 1.5;
  const SimReport rep = run_simulation(cfg);
  CHECK(rep.failures.empty());
  CHECK(rep.records.size() == 180);
  for (const auto& r : rep.records) {
    CHECK(r.truth_norm >= r.truth_inner - 1e-12);
    CHECK(r.is_null == (r.group >= cfg.s));
    CHECK(r.rank_stat >= 0.0);
    CHECK(r.rank_stat <= 1.0);
  }
  CHECK(rep.superset_violations() == 0);
  CHECK(rep.sign_violations() == 0);
  const Coverage c = rep.coverage(false);
  CHECK(c.norm_rate() >= c.inner_rate());
}

TEST_CASE("null trials with tau = 0: every group is null, nulls look uniform") {
  SimConfig cfg = desk_preset(SelectorKind::kIht);
  cfg.trials = 200;
  const SimReport rep = run_simulation(cfg);
  CHECK(rep.signal_pvalues().empty());
  CHECK(ks_uniformity(rep.null_pvalues()).pass);
  // With mu = 0 both truths vanish, so the two coverage indicators coincide.
  for (const auto& r : rep.records) {
    CHECK(r.truth_norm == doctest::Approx(0.0).scale(1.0));
    CHECK((r.L_alpha <= r.truth_norm) == (r.L_alpha <= r.truth_inner));
  }
}

TEST_CASE("group lasso trials run through the sampled path") {
  SimConfig cfg = desk_preset(SelectorKind::kGlasso);
  cfg.trials = 4;
  cfg.tau = 1.5;
  cfg.selector.B = 2000;
  const SimReport rep = run_simulation(cfg);
  CHECK(rep.failures.empty());
  CHECK(!rep.records.empty());
  for (const auto& r : rep.records) {
    CHECK(std::isnan(r.rank_stat));
    CHECK(r.p_std_error >= 0.0);
  }
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e10}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(kInf) == "inf");
  CHECK(format_double(kNaN) == "nan");
}

}
