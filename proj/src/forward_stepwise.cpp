#include "groupinf/forward_stepwise.hpp"

#include "groupinf/errors.hpp"

#include <algorithm>

namespace groupinf {

namespace {

double group_weight(const GroupedDesign& design, int g, const FsOptions& opts) {
  return opts.scale_by_group_size ? 1.0 / static_cast<double>(design.group_size(g)) : 1.0;
}

}  // namespace

FsEvent fs_select(const GroupedDesign& design, const Vector& Y, int T, const FsOptions& opts) {
  const int G = design.num_groups();
  if (T < 1 || T > G) throw ConfigError("T", "step count must lie in [1, number of groups]");
  if (Y.size() != design.n()) throw ConfigError("Y", "response length does not match design rows");

  FsEvent event;
  event.options = opts;
  event.basis = Matrix(design.n(), 0);
  event.basis_cols.push_back(0);
  std::vector<char> selected(static_cast<std::size_t>(G), 0);
  Vector residual = Y;

  for (int t = 0; t < T; ++t) {
    const Vector scores = design.X().transpose() * residual;
    int best = -1;
    double best_score = -1.0;
    for (int g = 0; g < G; ++g) {
      if (selected[static_cast<std::size_t>(g)]) continue;
      const double s = design.group_part(scores, g).squaredNorm() * group_weight(design, g, opts);
      if (s > best_score) {
        best = g;
        best_score = s;
      }
    }
    selected[static_cast<std::size_t>(best)] = 1;
    event.path.push_back(best);

    const Matrix Xg = design.block(best);
    const SubspaceBasis added =
        orthonormal_basis(project_out(event.basis, Xg), Xg.colwise().norm().maxCoeff());
    const Index old_cols = event.basis.cols();
    event.basis.conservativeResize(Eigen::NoChange, old_cols + added.k());
    event.basis.rightCols(added.k()) = added.V;
    event.basis_cols.push_back(event.basis.cols());

    residual = project_out(event.basis, Y);
    if (t + 1 < T && event.basis.cols() >= design.n()) {
      throw SelectionError("selected groups span R^n after " + std::to_string(t + 1) +
                           " steps; the residual is identically zero");
    }
  }
  return event;
}

std::vector<QuadraticConstraint> fs_constraints(const GroupedDesign& design, const FsEvent& event,
                                                const Vector& U, const Vector& Y_perp, int steps) {
  const int G = design.num_groups();
  std::vector<QuadraticConstraint> out;
  std::vector<char> in_model(static_cast<std::size_t>(G), 0);

  for (int k = 1; k <= steps; ++k) {
    const Matrix Q = event.basis_before(k);
    const Vector pu = project_out(Q, U);
    const Vector py = project_out(Q, Y_perp);
    const Vector xu = design.X().transpose() * pu;
    const Vector xy = design.X().transpose() * py;

    auto terms = [&](int g) {
      const Vector cu = design.group_part(xu, g);
      const Vector cy = design.group_part(xy, g);
      const double w = group_weight(design, g, event.options);
      return QuadraticConstraint{w * cu.squaredNorm(), w * cu.dot(cy), w * cy.squaredNorm()};
    };

    const int chosen = event.path[static_cast<std::size_t>(k - 1)];
    in_model[static_cast<std::size_t>(chosen)] = 1;
    const QuadraticConstraint lead = terms(chosen);
    for (int g = 0; g < G; ++g) {
      if (in_model[static_cast<std::size_t>(g)]) continue;
      const QuadraticConstraint other = terms(g);
      out.push_back({lead.a - other.a, lead.b - other.b, lead.c - other.c});
    }
  }
  return out;
}

namespace {

struct RegionBuild {
  ProjectionDecomposition decomposition;
  IntervalSet region;
};

RegionBuild build_region(const GroupedDesign& design, const Vector& Y, const FsEvent& event,
                         int tested, std::span<const int> control, int steps) {
  if (std::find(event.path.begin(), event.path.end(), tested) == event.path.end()) {
    throw SelectionError("tested group " + design.group_name(tested) + " is not on the path");
  }
  if (steps < 0) steps = event.steps();
  std::vector<int> S(control.begin(), control.end());
  if (std::find(S.begin(), S.end(), tested) == S.end()) S.push_back(tested);

  RegionBuild out;
  out.decomposition = decompose(Y, test_subspace(design, S, tested));
  const auto constraints =
      fs_constraints(design, event, out.decomposition.U, out.decomposition.Y_perp, steps);
  out.region = solve_all(constraints);
  return out;
}

}  // namespace

IntervalSet fs_region(const GroupedDesign& design, const Vector& Y, const FsEvent& event,
                      int tested, std::span<const int> control, int steps) {
  return build_region(design, Y, event, tested, control, steps).region;
}

std::vector<InferenceResult> fs_infer_event(const GroupedDesign& design, const Vector& Y,
                                            const FsEvent& event, double sigma,
                                            const InferenceOptions& opts, FsMode mode) {
  std::vector<InferenceResult> results;
  const int T = event.steps();
  for (int t = 1; t <= T; ++t) {
    const int g = event.path[static_cast<std::size_t>(t - 1)];
    std::vector<int> control;
    int steps = T;
    if (mode == FsMode::kSimultaneous) {
      for (int h : event.path) {
        if (h != g) control.push_back(h);
      }
    } else {
      control = event.selected_through(t - 1);
      steps = t;
    }
    RegionBuild rb = build_region(design, Y, event, g, control, steps);
    RadialProblem problem{static_cast<int>(rb.decomposition.basis.k()), sigma, rb.decomposition.R,
                          std::move(rb.region)};
    InferenceResult res = infer_explicit(problem, opts);
    res.group = g;
    res.decomposition = std::move(rb.decomposition);
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<InferenceResult> fs_infer(const GroupedDesign& design, const Vector& Y, int T,
                                      double sigma, const InferenceOptions& opts, FsMode mode,
                                      const FsOptions& fs_opts) {
  if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
  return fs_infer_event(design, Y, fs_select(design, Y, T, fs_opts), sigma, opts, mode);
}

}  // namespace groupinf
