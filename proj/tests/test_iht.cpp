#include "groupinf/errors.hpp"
#include "groupinf/iht.hpp"

#include "support.hpp"

#include <doctest.h>

#include <numeric>

using namespace groupinf;
using namespace testsupport;

TEST_SUITE("iht") {

// Direct transcription of the iteration, with a full sort for thresholding.
std::vector<std::vector<int>> naive_iht(const GroupedDesign& d, const Vector& Y, int k, int T, double eta) {
  const double n = static_cast<double>(d.n());
  Vector beta = Vector::Zero(d.p());
  std::vector<std::vector<int>> models;
  for (int t = 0; t < T; ++t) {
    const Vector tilde = beta + (eta / n) * d.X().transpose() * (Y - d.X() * beta);
    std::vector<std::pair<double, int>> norms;
    for (int g = 0; g < d.num_groups(); ++g) norms.push_back({-d.group_part(tilde, g).norm(), g});
    std::sort(norms.begin(), norms.end());
    std::vector<int> model;
    for (int i = 0; i < k; ++i) model.push_back(norms[i].second);
    std::sort(model.begin(), model.end());
    beta.setZero();
    for (int g : model) {
      for (Index j : d.columns(g)) beta(j) = tilde(j);
    }
    models.push_back(model);
  }
  return models;
}

TEST_CASE("gradient step uses the 1/n scaling") {
  const GroupedDesign d(Matrix::Identity(2, 2), {{0}, {1}});
  Vector Y(2);
  Y << 4.0, 2.0;
  const IhtEvent ev = iht_select(d, Y, IhtConfig::constant_step(1, 1, 1.0));
  CHECK(ev.iterates[0](0) == doctest::Approx(2.0));
  CHECK(ev.iterates[0](1) == doctest::Approx(1.0));
  CHECK(ev.final_model() == std::vector<int>{0});
}

TEST_CASE("models match a naive implementation") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 40; ++rep) {
    const GroupedDesign d = random_design(rng, 30, 8, 2);
    const Vector Y = normal_vector(rng, 30) * 3.0;
    const double eta = 0.5 + rep % 4;
    CHECK(iht_select(d, Y, IhtConfig::constant_step(3, 4, eta)).models == naive_iht(d, Y, 3, 4, eta));
  }
}

TEST_CASE("affine recursion reconstructs the iterates") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const GroupedDesign d = random_design(rng, 40, 6, 3);
    Vector beta = Vector::Zero(18);
    beta.head(6).setConstant(1.5);
    const Vector Y = d.X() * beta + normal_vector(rng, 40);
    IhtConfig cfg = IhtConfig::constant_step(2, 4, 2.0);
    cfg.eta = {1.0, 2.0, 3.0, 2.5};
    if (rep % 2) cfg.beta0 = normal_vector(rng, 18, 0.1);
    const IhtEvent ev = iht_select(d, Y, cfg);
    const int g = ev.final_model()[0];
    const auto dec = decompose(Y, test_subspace(d, ev.final_model(), g));
    const auto coeffs = iht_affine_coeffs(d, ev, cfg, dec.U, dec.Y_perp);
    for (int t = 0; t < cfg.T; ++t) {
      const Vector rec = dec.R * coeffs[t].first + coeffs[t].second;
      CHECK((rec - ev.iterates[t]).norm() <= 1e-10 * ev.iterates[t].norm());
    }
  }
}

TEST_CASE("replay equivalence of the explicit region") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const GroupedDesign d = random_design(rng, 50, 8, 2);
    Vector beta = Vector::Zero(16);
    beta.head(4).setConstant(rep % 2 ? 1.5 : 0.0);
    const Vector Y = d.X() * beta + normal_vector(rng, 50);
    const IhtConfig cfg = IhtConfig::constant_step(3, 3, 2.0);
    const IhtEvent ev = iht_select(d, Y, cfg);
    for (int g : ev.final_model()) {
      const auto dec = decompose(Y, test_subspace(d, ev.final_model(), g));
      const IntervalSet region = iht_region(d, Y, ev, cfg, g);
      CHECK(region.contains(dec.R));
      for (int i = 1; i <= 30; ++i) {
        const double r = 3.0 * dec.R * i / 30.0 + 1e-3;
        const bool replay = iht_select(d, dec.at_radius(r), cfg).models == ev.models;
        CHECK(replay == region.contains(r));
      }
    }
  }
}

TEST_CASE("property: more iterations only add constraints") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> ud(0.0, 10.0);
  for (int rep = 0; rep < 30; ++rep) {
    const GroupedDesign d = random_design(rng, 40, 6, 2);
    const Vector Y = normal_vector(rng, 40, 2.0);
    const IhtConfig cfg = IhtConfig::constant_step(2, 5, 2.0);
    const IhtEvent ev = iht_select(d, Y, cfg);
    const int g = ev.final_model()[0];
    const auto dec = decompose(Y, test_subspace(d, ev.final_model(), g));
    const auto coeffs = iht_affine_coeffs(d, ev, cfg, dec.U, dec.Y_perp);
    IntervalSet prev = IntervalSet::positive_half_line();
    for (int s = 1; s <= 5; ++s) {
      const auto cons = iht_constraints(d, ev, coeffs, s);
      CHECK(cons.size() == static_cast<std::size_t>(s * 2 * 4));
      const IntervalSet cur = solve_all(cons);
      for (int i = 0; i < 50; ++i) {
        const double r = ud(rng);
        if (cur.contains(r)) CHECK(prev.contains(r));
      }
      prev = cur;
    }
  }
}

TEST_CASE("inference and validation") {
  std::mt19937_64 rng(45);
  const GroupedDesign d = random_design(rng, 60, 6, 3);
  Vector beta = Vector::Zero(18);
  beta.head(3).setConstant(3.0);
  const Vector Y = d.X() * beta + normal_vector(rng, 60);
  InferenceOptions opts;
  const auto res = iht_infer(d, Y, IhtConfig::constant_step(2, 3, 2.0), 1.0, opts);
  REQUIRE(res.size() == 2);
  for (const auto& r : res) CHECK((r.p_value < opts.alpha) == (r.lower_bound > 0.0));

  CHECK_THROWS_AS(iht_select(d, Y, IhtConfig::constant_step(0, 3, 2.0)), ConfigError);
  CHECK_THROWS_AS(iht_select(d, Y, IhtConfig::constant_step(7, 3, 2.0)), ConfigError);
  CHECK_THROWS_AS(iht_select(d, Y, IhtConfig::constant_step(2, 3, -1.0)), ConfigError);
  IhtConfig bad = IhtConfig::constant_step(2, 3, 2.0);
  bad.eta.pop_back();
  CHECK_THROWS_AS(iht_select(d, Y, bad), ConfigError);
}

}
