#include "groupinf/errors.hpp"
#include "groupinf/quadrature.hpp"
#include "groupinf/root_finding.hpp"
#include "groupinf/truncated_chi.hpp"

#include "support.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <random>

using namespace groupinf;
using namespace testsupport;

TEST_SUITE("truncated_chi") {

TEST_CASE("adaptive quadrature on known integrals") {
  auto r1 = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12);
  CHECK(r1.value == doctest::Approx(2.0).epsilon(1e-12));
  auto r2 = integrate_adaptive([](double x) { return std::exp(-x * x); }, -10.0, 10.0, 1e-12);
  CHECK(r2.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
  auto r3 = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
  CHECK(r3.value == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  GaussLegendreRule rule(5);
  // Exact for degree 9.
  CHECK(rule.apply([](double x) { return std::pow(x, 8); }, 0.0, 1.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("monotone root finder keeps the sign of target - f(0)") {
  auto f = [](double t) { return std::tanh(t - 0.3); };
  const MonotoneRootOptions opts;
  const double root = solve_increasing(f, 0.5, f(0.0), opts);
  CHECK(root == doctest::Approx(0.3 + std::atanh(0.5)).epsilon(1e-9));
  CHECK(solve_increasing(f, f(0.0), f(0.0), opts) == 0.0);
  CHECK(solve_increasing(f, -0.9, f(0.0), opts) < 0.0);
  CHECK_THROWS_AS(solve_increasing(f, 1.5, f(0.0), opts), BracketError);
}

TEST_CASE("untruncated region reproduces the chi survival function") {
  for (int k : {1, 2, 3, 5, 10, 30}) {
    boost::math::chi_squared_distribution<double> chi2(k);
    for (double sigma : {0.3, 1.0, 4.0}) {
      for (double z : {0.1, 0.8, 1.7, 3.0, 6.0}) {
        const RadialProblem pr{k, sigma, z * sigma, IntervalSet::positive_half_line()};
        CHECK(p_value(pr) == doctest::Approx(boost::math::cdf(boost::math::complement(chi2, z * z))).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("k = 1 matches the closed-form truncated normal") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double sigma = 0.3 + 2.0 * ud(rng);
    const double a = 3.0 * ud(rng);
    const double b = a + 0.1 + 3.0 * ud(rng);
    const double c = b + 0.1 + 2.0 * ud(rng);
    const IntervalSet region = rep % 3 == 0 ? IntervalSet{{a, b}}
                               : rep % 3 == 1 ? IntervalSet{{a, b}, {c, kInf}}
                                              : IntervalSet{{a, b}, {c, c + 1.0}};
    const double r_obs = a + (b - a) * (0.05 + 0.9 * ud(rng));
    const double t = 4.0 * ud(rng) - 2.0;
    const RadialProblem pr{1, sigma, r_obs, region};
    CHECK(survival_fraction(pr, t) == doctest::Approx(truncnorm_survival(region, r_obs, sigma, t)).epsilon(1e-9));
  }
}

TEST_CASE("multi-interval k > 1 matches fine-grid Simpson integration") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int rep = 0; rep < 12; ++rep) {
    const int k = 2 + rep % 5;
    const double sigma = 0.5 + ud(rng);
    const double a = 2.0 * ud(rng);
    const double b = a + 0.5 + ud(rng);
    const double c = b + 0.5 + ud(rng);
    const IntervalSet region{{a, b}, {c, kInf}};
    const double r_obs = rep % 2 ? 0.5 * (a + b) : c + 0.3;
    const double t = 2.0 * ud(rng) - 1.0;
    const RadialProblem pr{k, sigma, r_obs, region};
    const double upper = std::max(c, 3.0) + 20.0 * sigma + std::abs(t);
    CHECK(survival_fraction(pr, t) ==
          doctest::Approx(simpson_survival(region, r_obs, k, sigma, t, upper, 20000)).epsilon(1e-8));
  }
}

TEST_CASE("property: f_Y is increasing in t and the lower bound solves f = alpha") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int rep = 0; rep < 60; ++rep) {
    const int k = 1 + rep % 6;
    const double sigma = 0.5 + ud(rng);
    const double a = 3.0 * ud(rng);
    const IntervalSet region{{a, a + 0.5 + 2.0 * ud(rng)}, {a + 4.0, kInf}};
    const double r_obs = rep % 2 ? a + 0.3 : a + 4.0 + 3.0 * ud(rng);
    const RadialProblem pr{k, sigma, r_obs, region};
    double prev = -1.0;
    for (double t = -6.0; t <= 10.0; t += 0.5) {
      const double f = survival_fraction(pr, t);
      CHECK(f >= prev);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
      prev = f;
    }
    const double alpha = 0.05 + 0.4 * ud(rng);
    const double L = lower_bound(pr, alpha);
    CHECK(survival_fraction(pr, L) == doctest::Approx(alpha).epsilon(1e-7));
    const double p = p_value(pr);
    CHECK((p < alpha) == (L > 0.0));
    const auto [lo, hi] = two_sided_interval(pr, alpha);
    CHECK(lo < hi);
  }
}

TEST_CASE("infer_explicit fills the result and validates input") {
  const RadialProblem pr{3, 1.0, 2.5, IntervalSet{{2.0, kInf}}};
  InferenceOptions opts;
  opts.alpha = 0.1;
  opts.two_sided = true;
  const InferenceResult res = infer_explicit(pr, opts);
  CHECK(res.k == 3);
  CHECK(res.region.has_value());
  CHECK(res.two_sided.has_value());
  CHECK(res.two_sided->first < res.two_sided->second);
  CHECK(res.p_value == doctest::Approx(p_value(pr)));
  CHECK(res.diagnostics.quadrature_rel_error < 1e-8);

  CHECK_THROWS_AS(infer_explicit(RadialProblem{3, 1.0, 1.0, IntervalSet{{2.0, kInf}}}, opts), NumericalError);
  CHECK_THROWS_AS(p_value(RadialProblem{3, 1.0, 1.0, IntervalSet{}}), NumericalError);
  CHECK_THROWS_AS(lower_bound(pr, 1.5), ConfigError);
}

TEST_CASE("extreme tails stay finite") {
  // Observed radius far above the untruncated bulk.
  const RadialProblem far{5, 1.0, 30.0, IntervalSet::positive_half_line()};
  const double p = p_value(far);
  CHECK(p >= 0.0);
  CHECK(p < 1e-100);
  CHECK(lower_bound(far, 0.1) > 20.0);
  // Region far in the tail: the conditional law is still well defined.
  const RadialProblem tail{2, 1.0, 50.5, IntervalSet{{50.0, 51.0}}};
  const double pt = p_value(tail);
  CHECK(pt > 0.0);
  CHECK(pt < 1.0);
}

}
