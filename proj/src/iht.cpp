#include "groupinf/iht.hpp"

#include "groupinf/errors.hpp"

#include <algorithm>
#include <numeric>

namespace groupinf {

IhtConfig IhtConfig::constant_step(int k_groups, int T, double eta) {
  IhtConfig c;
  c.k_groups = k_groups;
  c.T = T;
  c.eta.assign(static_cast<std::size_t>(std::max(T, 0)), eta);
  return c;
}

void IhtConfig::validate(const GroupedDesign& design) const {
  if (k_groups < 1 || k_groups > design.num_groups()) {
    throw ConfigError("k", "IHT group count must lie in [1, number of groups]");
  }
  if (T < 1) throw ConfigError("T", "IHT needs at least one iteration");
  if (static_cast<int>(eta.size()) != T) throw ConfigError("eta", "need one step size per iteration");
  for (double e : eta) {
    if (!(e > 0.0)) throw ConfigError("eta", "step sizes must be positive");
  }
  if (beta0.size() != 0 && beta0.size() != design.p()) {
    throw ConfigError("beta0", "initial coefficient vector has the wrong length");
  }
}

namespace {

// Indices of the k largest group norms of v, ties to the lower index, sorted.
std::vector<int> top_groups(const GroupedDesign& design, const Vector& v, int k) {
  const int G = design.num_groups();
  std::vector<double> norms(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) norms[static_cast<std::size_t>(g)] = design.group_part(v, g).squaredNorm();
  std::vector<int> order(static_cast<std::size_t>(G));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

// Zeroes every coordinate outside the groups of `model`.
Vector restrict_to(const GroupedDesign& design, const Vector& v, const std::vector<int>& model) {
  Vector out = Vector::Zero(v.size());
  for (int g : model) {
    for (Index j : design.columns(g)) out(j) = v(j);
  }
  return out;
}

// (I - (eta / n) X^T X) v without forming X^T X.
Vector gradient_map(const GroupedDesign& design, double eta, const Vector& v) {
  const double step = eta / static_cast<double>(design.n());
  return v - step * (design.X().transpose() * (design.X() * v));
}

}  // namespace

IhtEvent iht_select(const GroupedDesign& design, const Vector& Y, const IhtConfig& config) {
  config.validate(design);
  if (Y.size() != design.n()) throw ConfigError("Y", "response length does not match design rows");

  IhtEvent event;
  Vector beta = config.beta0.size() ? config.beta0 : Vector::Zero(design.p());
  const double n = static_cast<double>(design.n());
  for (int t = 0; t < config.T; ++t) {
    const double step = config.eta[static_cast<std::size_t>(t)] / n;
    Vector tilde = beta - step * (design.X().transpose() * (design.X() * beta - Y));
    std::vector<int> model = top_groups(design, tilde, config.k_groups);
    beta = restrict_to(design, tilde, model);
    event.models.push_back(std::move(model));
    event.iterates.push_back(std::move(tilde));
  }
  return event;
}

std::vector<std::pair<Vector, Vector>> iht_affine_coeffs(const GroupedDesign& design,
                                                         const IhtEvent& event,
                                                         const IhtConfig& config, const Vector& U,
                                                         const Vector& Y_perp) {
  const double n = static_cast<double>(design.n());
  const Vector XtU = design.X().transpose() * U;
  const Vector XtY = design.X().transpose() * Y_perp;
  const Vector beta0 = config.beta0.size() ? config.beta0 : Vector::Zero(design.p());

  std::vector<std::pair<Vector, Vector>> coeffs;
  for (int t = 0; t < event.iterations(); ++t) {
    const double eta = config.eta[static_cast<std::size_t>(t)];
    const double step = eta / n;
    Vector c;
    Vector d;
    if (t == 0) {
      c = step * XtU;
      d = gradient_map(design, eta, beta0) + step * XtY;
    } else {
      const auto& prev = coeffs.back();
      const auto& model = event.models[static_cast<std::size_t>(t - 1)];
      c = gradient_map(design, eta, restrict_to(design, prev.first, model)) + step * XtU;
      d = gradient_map(design, eta, restrict_to(design, prev.second, model)) + step * XtY;
    }
    coeffs.emplace_back(std::move(c), std::move(d));
  }
  return coeffs;
}

std::vector<QuadraticConstraint> iht_constraints(
    const GroupedDesign& design, const IhtEvent& event,
    const std::vector<std::pair<Vector, Vector>>& coeffs, int steps) {
  const int G = design.num_groups();
  std::vector<QuadraticConstraint> out;
  for (int t = 0; t < steps; ++t) {
    const auto& [c, d] = coeffs[static_cast<std::size_t>(t)];
    std::vector<QuadraticConstraint> norms(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
      const Vector cg = design.group_part(c, g);
      const Vector dg = design.group_part(d, g);
      norms[static_cast<std::size_t>(g)] = {cg.squaredNorm(), cg.dot(dg), dg.squaredNorm()};
    }
    const auto& model = event.models[static_cast<std::size_t>(t)];
    std::vector<char> in_model(static_cast<std::size_t>(G), 0);
    for (int g : model) in_model[static_cast<std::size_t>(g)] = 1;
    for (int g : model) {
      const QuadraticConstraint& kept = norms[static_cast<std::size_t>(g)];
      for (int h = 0; h < G; ++h) {
        if (in_model[static_cast<std::size_t>(h)]) continue;
        const QuadraticConstraint& dropped = norms[static_cast<std::size_t>(h)];
        out.push_back({kept.a - dropped.a, kept.b - dropped.b, kept.c - dropped.c});
      }
    }
  }
  return out;
}

namespace {

struct RegionBuild {
  ProjectionDecomposition decomposition;
  IntervalSet region;
};

RegionBuild build_region(const GroupedDesign& design, const Vector& Y, const IhtEvent& event,
                         const IhtConfig& config, int tested) {
  const auto& S = event.final_model();
  RegionBuild out;
  out.decomposition = decompose(Y, test_subspace(design, S, tested));
  const auto coeffs =
      iht_affine_coeffs(design, event, config, out.decomposition.U, out.decomposition.Y_perp);
  out.region = solve_all(iht_constraints(design, event, coeffs, event.iterations()));
  return out;
}

}  // namespace

IntervalSet iht_region(const GroupedDesign& design, const Vector& Y, const IhtEvent& event,
                       const IhtConfig& config, int tested) {
  return build_region(design, Y, event, config, tested).region;
}

std::vector<InferenceResult> iht_infer_event(const GroupedDesign& design, const Vector& Y,
                                             const IhtEvent& event, const IhtConfig& config,
                                             double sigma, const InferenceOptions& opts) {
  std::vector<InferenceResult> results;
  for (int g : event.final_model()) {
    RegionBuild rb = build_region(design, Y, event, config, g);
    RadialProblem problem{static_cast<int>(rb.decomposition.basis.k()), sigma, rb.decomposition.R,
                          std::move(rb.region)};
    InferenceResult res = infer_explicit(problem, opts);
    res.group = g;
    res.decomposition = std::move(rb.decomposition);
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<InferenceResult> iht_infer(const GroupedDesign& design, const Vector& Y,
                                       const IhtConfig& config, double sigma,
                                       const InferenceOptions& opts) {
  if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
  return iht_infer_event(design, Y, iht_select(design, Y, config), config, sigma, opts);
}

}  // namespace groupinf
