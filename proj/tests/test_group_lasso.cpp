#include "groupinf/errors.hpp"
#include "groupinf/group_lasso.hpp"
#include "groupinf/rng.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace groupinf;
using namespace testsupport;

TEST_SUITE("group_lasso") {

double lambda_max(const GroupedDesign& d, const Vector& y) {
  const Vector c = d.X().transpose() * y;
  double m = 0.0;
  for (int g = 0; g < d.num_groups(); ++g) m = std::max(m, d.group_part(c, g).norm());
  return m;
}

// Accelerated proximal gradient (FISTA) run for a fixed, large budget.
Vector fista(const GroupedDesign& d, const Vector& y, double lambda, int iters) {
  const double L = Eigen::SelfAdjointEigenSolver<Matrix>(d.X().transpose() * d.X()).eigenvalues().maxCoeff();
  Vector x = Vector::Zero(d.p());
  Vector z = x;
  double tk = 1.0;
  for (int it = 0; it < iters; ++it) {
    const Vector grad = d.X().transpose() * (d.X() * z - y);
    Vector u = z - grad / L;
    Vector next = u;
    for (int g = 0; g < d.num_groups(); ++g) {
      const Vector ug = d.group_part(u, g);
      const double nu = ug.norm();
      const double shrink = nu > lambda / L ? 1.0 - (lambda / L) / nu : 0.0;
      for (std::size_t i = 0; i < d.columns(g).size(); ++i) next(d.columns(g)[i]) = shrink * ug(i);
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    z = next + ((tk - 1.0) / tn) * (next - x);
    x = next;
    tk = tn;
  }
  return x;
}

TEST_CASE("large lambda gives the empty model exactly") {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const GroupedDesign d = random_design(rng, 40, 6, 3);
    const Vector y = normal_vector(rng, 40);
    const double lm = lambda_max(d, y);
    for (double f : {1.0, 1.5, 10.0}) {
      const GlassoFit fit = glasso_fit(d, y, lm * f);
      CHECK(fit.active.empty());
      CHECK(fit.beta.isZero(0.0));
    }
    CHECK(!glasso_fit(d, y, 0.9 * lm).active.empty());
  }
}

TEST_CASE("orthonormal single-column groups reduce to soft thresholding") {
  std::mt19937_64 rng(52);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(normal_matrix(rng, 30, 8)).householderQ() * Matrix::Identity(30, 8);
  std::vector<std::vector<Index>> groups;
  for (Index j = 0; j < 8; ++j) groups.push_back({j});
  const GroupedDesign d(Q, groups);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector y = normal_vector(rng, 30, 2.0);
    const double lambda = 0.5 + 0.2 * rep;
    const GlassoFit fit = glasso_fit(d, y, lambda);
    const Vector z = Q.transpose() * y;
    for (Index j = 0; j < 8; ++j) {
      const double soft = std::copysign(std::max(std::abs(z(j)) - lambda, 0.0), z(j));
      CHECK(fit.beta(j) == doctest::Approx(soft).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("objective matches a long proximal-gradient reference") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 8; ++rep) {
    const GroupedDesign d = random_design(rng, 50, 6, 3);
    Vector beta = Vector::Zero(18);
    beta.head(6).setConstant(1.0);
    const Vector y = d.X() * beta + normal_vector(rng, 50);
    const double lambda = 0.3 * lambda_max(d, y);
    const GlassoFit fit = glasso_fit(d, y, lambda);
    const Vector ref = fista(d, y, lambda, 20000);
    const double a = glasso_objective(d, y, fit.beta, lambda);
    const double b = glasso_objective(d, y, ref, lambda);
    CHECK(a <= b + 1e-8 * std::max(1.0, std::abs(b)));
    CHECK(std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b)));
  }
}

TEST_CASE("property: KKT residual at every fit") {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> ud(0.05, 1.0);
  for (int rep = 0; rep < 60; ++rep) {
    // Correlated columns and non-contiguous groups.
    Matrix X = normal_matrix(rng, 40, 12);
    X.col(5) += 0.9 * X.col(0);
    X.col(7) += 0.8 * X.col(2);
    const GroupedDesign d(X, {{0, 3, 7}, {1, 11}, {2}, {4, 5, 6}, {8, 9, 10}});
    const Vector y = normal_vector(rng, 40, 3.0);
    const double lambda = ud(rng) * lambda_max(d, y);
    const GlassoFit fit = glasso_fit(d, y, lambda);
    const double res = kkt_residual(d, y, fit.beta, lambda);
    CHECK(res <= 1e-8 * fit.scale * 1.0001);
    CHECK(fit.kkt_residual <= 1e-8 * fit.scale);
    for (int g = 0; g < d.num_groups(); ++g) {
      const bool in = std::find(fit.active.begin(), fit.active.end(), g) != fit.active.end();
      CHECK(in == (d.group_part(fit.beta, g).norm() > 0.0));
    }
  }
}

TEST_CASE("property: joint scaling of y and lambda") {
  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 20; ++rep) {
    const GroupedDesign d = random_design(rng, 40, 6, 3);
    const Vector y = normal_vector(rng, 40, 2.0);
    const double lambda = 0.4 * lambda_max(d, y);
    const GlassoFit a = glasso_fit(d, y, lambda);
    for (double c : {0.1, 3.0, 50.0}) {
      const GlassoFit b = glasso_fit(d, c * y, c * lambda);
      CHECK(b.active == a.active);
      CHECK((b.beta - c * a.beta).norm() <= 1e-6 * c * std::max(1.0, a.beta.norm()));
    }
  }
}

TEST_CASE("event oracle") {
  std::mt19937_64 rng(56);
  const GroupedDesign d = random_design(rng, 40, 6, 3);
  Vector beta = Vector::Zero(18);
  beta.head(3).setConstant(2.0);
  const Vector y = d.X() * beta + normal_vector(rng, 40);
  const double lambda = 0.5 * lambda_max(d, y);
  auto solver = std::make_shared<const GlassoSolver>(d);
  const GlassoFit fit = solver->fit_response(y, lambda);
  REQUIRE(!fit.active.empty());
  auto oracle = glasso_event_oracle(solver, lambda, fit.active, fit.beta);
  CHECK(oracle(y) == std::optional<bool>(true));
  CHECK(oracle(Vector::Zero(40)) == std::optional<bool>(false));
  auto cold = glasso_event_oracle(solver, lambda, fit.active);
  CHECK(cold(y) == std::optional<bool>(true));
}

TEST_CASE("oracle matches the soft-threshold support rule on orthonormal designs") {
  std::mt19937_64 rng(57);
  const Matrix Q = Eigen::HouseholderQR<Matrix>(normal_matrix(rng, 20, 5)).householderQ() * Matrix::Identity(20, 5);
  const GroupedDesign d(Q, {{0}, {1}, {2}, {3}, {4}});
  auto solver = std::make_shared<const GlassoSolver>(d);
  const double lambda = 1.0;
  const std::vector<int> reference = {0, 2};
  auto oracle = glasso_event_oracle(solver, lambda, reference);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector y = normal_vector(rng, 20, 1.2);
    const Vector z = Q.transpose() * y;
    std::vector<int> support;
    for (int j = 0; j < 5; ++j) {
      if (std::abs(z(j)) > lambda) support.push_back(j);
    }
    CHECK(oracle(y) == std::optional<bool>(support == reference));
  }
}

TEST_CASE("rank-deficient groups are rejected") {
  std::mt19937_64 rng(58);
  Matrix X = normal_matrix(rng, 20, 4);
  X.col(1) = 2.0 * X.col(0);
  const GroupedDesign d(X, {{0, 1}, {2, 3}});
  CHECK_THROWS_AS(GlassoSolver{d}, ConfigError);
  CHECK_THROWS_AS(glasso_fit(random_design(rng, 20, 2, 2), normal_vector(rng, 20), 0.0), ConfigError);
}

TEST_CASE("lambda search hits the target count") {
  std::mt19937_64 rng(59);
  for (int rep = 0; rep < 10; ++rep) {
    const GroupedDesign d = random_design(rng, 60, 10, 2);
    Vector beta = Vector::Zero(20);
    beta.head(6).setConstant(1.0);
    const Vector y = d.X() * beta + normal_vector(rng, 60);
    const GlassoSolver solver(d);
    for (int target : {1, 3, 5}) {
      const double lambda = glasso_lambda_for_count(solver, y, target);
      CHECK(solver.fit_response(y, lambda).active.size() == static_cast<std::size_t>(target));
    }
  }
}

TEST_CASE("sampled inference: B-consistency and sign agreement") {
  std::mt19937_64 rng(60);
  const GroupedDesign d = random_design(rng, 50, 5, 2);
  Vector beta = Vector::Zero(10);
  beta.head(2).setConstant(1.0);
  const Vector y = d.X() * beta + normal_vector(rng, 50);
  const double lambda = 0.6 * lambda_max(d, y);
  InferenceOptions opts;
  GlassoInferenceOptions small;
  small.B = 10000;
  small.seed = 3;
  GlassoInferenceOptions large = small;
  large.B = 100000;
  large.seed = 4;
  const auto a = glasso_infer(d, y, lambda, 1.0, opts, small);
  const auto b = glasso_infer(d, y, lambda, 1.0, opts, large);
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double se = std::hypot(a[i].diagnostics.p_value_std_error, b[i].diagnostics.p_value_std_error);
    CHECK(std::abs(a[i].p_value - b[i].p_value) < 3.0 * se + 1e-12);
    CHECK((a[i].p_value < opts.alpha) == (a[i].lower_bound > 0.0));
    CHECK((b[i].p_value < opts.alpha) == (b[i].lower_bound > 0.0));
    CHECK(a[i].diagnostics.samples == 10000);
  }
  CHECK_THROWS_AS(glasso_infer(d, y, 2.0 * lambda_max(d, y), 1.0, opts, small), SelectionError);
}

}
