#include "groupinf/group_lasso.hpp"

#include "groupinf/errors.hpp"
#include "groupinf/rng.hpp"

#include <algorithm>
#include <cmath>

namespace groupinf {

namespace {

constexpr double kActiveRel = 1e-8;
constexpr double kActiveAbs = 1e-12;

double max_group_norm(const GroupedDesign& design, const Vector& v) {
  double m = 0.0;
  for (int g = 0; g < design.num_groups(); ++g) m = std::max(m, design.group_part(v, g).norm());
  return m;
}

// Stationarity violation of group g given the gradient c = X^T (y - X beta).
double group_violation(const Vector& cg, const Vector& bg, double lambda) {
  const double nb = bg.norm();
  if (nb == 0.0) return std::max(0.0, cg.norm() - lambda);
  return (cg - (lambda / nb) * bg).norm();
}

}  // namespace

std::vector<int> active_groups(const GroupedDesign& design, const Vector& beta) {
  const double thresh = kActiveRel * beta.norm() + kActiveAbs;
  std::vector<int> out;
  for (int g = 0; g < design.num_groups(); ++g) {
    if (design.group_part(beta, g).norm() > thresh) out.push_back(g);
  }
  return out;
}

double kkt_residual(const GroupedDesign& design, const Vector& y, const Vector& beta,
                    double lambda) {
  const Vector c = design.X().transpose() * (y - design.X() * beta);
  double worst = 0.0;
  for (int g = 0; g < design.num_groups(); ++g) {
    worst = std::max(worst, group_violation(design.group_part(c, g), design.group_part(beta, g), lambda));
  }
  return worst;
}

double glasso_objective(const GroupedDesign& design, const Vector& y, const Vector& beta,
                        double lambda) {
  double pen = 0.0;
  for (int g = 0; g < design.num_groups(); ++g) pen += design.group_part(beta, g).norm();
  return 0.5 * (y - design.X() * beta).squaredNorm() + lambda * pen;
}

GlassoSolver::GlassoSolver(const GroupedDesign& design)
    : design_(std::make_shared<const GroupedDesign>(design)) {
  const Matrix& X = design_->X();
  for (int g = 0; g < design_->num_groups(); ++g) {
    Block b;
    const Matrix Xg = design_->block(g);
    b.gram = Xg.transpose() * Xg;
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.gram);
    b.W = es.eigenvectors();
    b.h = es.eigenvalues();
    const double hmax = b.h.maxCoeff();
    if (!(b.h.minCoeff() > 1e-12 * hmax * static_cast<double>(b.h.size()))) {
      throw ConfigError("groups", "group " + design_->group_name(g) +
                                      " has linearly dependent columns; the group lasso needs full-rank groups");
    }
    b.column = X.transpose() * Xg;
    const auto& cols = design_->columns(g);
    b.start = cols.front();
    b.contiguous = true;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] != b.start + static_cast<Index>(i)) b.contiguous = false;
    }
    max_group_size_ = std::max(max_group_size_, static_cast<Index>(cols.size()));
    blocks_.push_back(std::move(b));
  }
}

GlassoFit GlassoSolver::fit(const Vector& Xty, double lambda, const GlassoOptions& opts,
                            const Vector* warm_start) const {
  if (!(lambda > 0.0)) throw ConfigError("lambda", "lambda must be positive");
  const GroupedDesign& design = *design_;
  const int G = design.num_groups();

  GlassoFit fit;
  fit.lambda = lambda;
  fit.scale = std::max(lambda, max_group_norm(design, Xty));
  const double tol = opts.kkt_tol * fit.scale;

  // Scratch buffers sized for the largest group; the sweep allocates nothing.
  const Index mmax = max_group_size_;
  Vector old(mmax), cg(mmax), v(mmax), z(mmax), tmp(mmax), fresh(mmax);
  auto load = [&](const Block& blk, int g, const Vector& src, Vector& dst) {
    const Index m = blk.h.size();
    if (blk.contiguous) {
      dst.head(m) = src.segment(blk.start, m);
    } else {
      const auto& cols = design.columns(g);
      for (Index i = 0; i < m; ++i) dst(i) = src(cols[static_cast<std::size_t>(i)]);
    }
  };
  auto store = [&](const Block& blk, int g, const Vector& src, Vector& dst) {
    const Index m = blk.h.size();
    if (blk.contiguous) {
      dst.segment(blk.start, m) = src.head(m);
    } else {
      const auto& cols = design.columns(g);
      for (Index i = 0; i < m; ++i) dst(cols[static_cast<std::size_t>(i)]) = src(i);
    }
  };

  Vector beta = Vector::Zero(design.p());
  if (warm_start && warm_start->size() == design.p()) beta = *warm_start;
  Vector c = Xty;  // X^T (y - X beta)
  for (int g = 0; g < G; ++g) {
    const Block& blk = blocks_[static_cast<std::size_t>(g)];
    const Index m = blk.h.size();
    load(blk, g, beta, old);
    if (old.head(m).squaredNorm() > 0.0) c.noalias() -= blk.column * old.head(m);
  }

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    for (int g = 0; g < G; ++g) {
      const Block& blk = blocks_[static_cast<std::size_t>(g)];
      const Index m = blk.h.size();
      load(blk, g, beta, old);
      load(blk, g, c, cg);
      const bool was_zero = old.head(m).squaredNorm() == 0.0;
      if (was_zero && cg.head(m).norm() <= lambda) continue;

      v.head(m) = cg.head(m);
      if (!was_zero) v.head(m).noalias() += blk.gram * old.head(m);
      const double nv = v.head(m).norm();
      if (nv <= lambda) {
        fresh.head(m).setZero();
      } else {
        // phi(rho) = sum z_i^2 / (h_i rho + lambda)^2 - 1, convex and
        // decreasing; Newton from a point with phi >= 0 increases monotonically.
        z.head(m).noalias() = blk.W.transpose() * v.head(m);
        double rho = (nv - lambda) / blk.h(m - 1);
        for (int it = 0; it < 100; ++it) {
          double phi = -1.0;
          double dphi = 0.0;
          for (Index i = 0; i < m; ++i) {
            const double den = blk.h(i) * rho + lambda;
            const double q = z(i) * z(i) / (den * den);
            phi += q;
            dphi -= 2.0 * q * blk.h(i) / den;
          }
          if (phi <= 0.0 || dphi >= 0.0) break;
          const double step = phi / dphi;
          rho -= step;
          if (-step <= 1e-16 * rho) break;
        }
        for (Index i = 0; i < m; ++i) tmp(i) = z(i) * rho / (blk.h(i) * rho + lambda);
        fresh.head(m).noalias() = blk.W * tmp.head(m);
      }
      tmp.head(m) = fresh.head(m) - old.head(m);
      if (tmp.head(m).squaredNorm() == 0.0) continue;
      store(blk, g, fresh, beta);
      c.noalias() -= blk.column * tmp.head(m);
    }

    double worst = 0.0;
    for (int g = 0; g < G; ++g) {
      const Block& blk = blocks_[static_cast<std::size_t>(g)];
      const Index m = blk.h.size();
      load(blk, g, beta, old);
      load(blk, g, c, cg);
      const double nb = old.head(m).norm();
      const double viol = nb == 0.0 ? std::max(0.0, cg.head(m).norm() - lambda)
                                    : (cg.head(m) - (lambda / nb) * old.head(m)).norm();
      worst = std::max(worst, viol);
    }
    if (worst <= tol) {
      fit.beta = std::move(beta);
      fit.active = active_groups(design, fit.beta);
      fit.kkt_residual = worst;
      fit.sweeps = sweep;
      return fit;
    }
  }
  throw ConvergenceError("group lasso did not reach the KKT tolerance in " +
                         std::to_string(opts.max_sweeps) + " sweeps");
}

GlassoFit GlassoSolver::fit_response(const Vector& y, double lambda, const GlassoOptions& opts,
                                     const Vector* warm_start) const {
  if (y.size() != design_->n()) throw ConfigError("Y", "response length does not match design rows");
  return fit(design_->X().transpose() * y, lambda, opts, warm_start);
}

GlassoFit glasso_fit(const GroupedDesign& design, const Vector& y, double lambda,
                     const GlassoOptions& opts) {
  return GlassoSolver(design).fit_response(y, lambda, opts);
}

std::function<std::optional<bool>(const Vector&)> glasso_event_oracle(
    std::shared_ptr<const GlassoSolver> solver, double lambda, std::vector<int> reference,
    Vector warm_start, GlassoOptions opts) {
  return [solver = std::move(solver), lambda, reference = std::move(reference),
          warm = std::move(warm_start), opts](const Vector& y) -> std::optional<bool> {
    try {
      const GlassoFit f = solver->fit_response(y, lambda, opts, warm.size() ? &warm : nullptr);
      return f.active == reference;
    } catch (const ConvergenceError&) {
      return std::nullopt;
    }
  };
}

InferenceResult glasso_infer_group(const std::shared_ptr<const GlassoSolver>& solver, const Vector& Y,
                                   const GlassoFit& fit, int g, double sigma, const InferenceOptions& opts,
                                   const GlassoInferenceOptions& gopts) {
  if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
  if (std::find(fit.active.begin(), fit.active.end(), g) == fit.active.end()) {
    throw SelectionError("group " + std::to_string(g) + " is not in the fitted support");
  }
  const GroupedDesign& design = solver->design();
  ProjectionDecomposition dec = decompose(Y, test_subspace(design, fit.active, g));
  const Vector XtU = design.X().transpose() * dec.U;
  const Vector XtY = design.X().transpose() * dec.Y_perp;
  const double lambda = fit.lambda;
  const GlassoOptions sopts = gopts.solver;
  const auto& reference = fit.active;
  const Vector& warm = fit.beta;
  RadiusOracle oracle = [&](double r) -> std::optional<bool> {
    try {
      const GlassoFit f = solver->fit(r * XtU + XtY, lambda, sopts, &warm);
      return f.active == reference;
    } catch (const ConvergenceError&) {
      return std::nullopt;
    }
  };
  const auto sample =
      ImportanceSample::draw(oracle, static_cast<int>(dec.basis.k()), sigma, dec.R, gopts.B,
                             derive_seed(gopts.seed, streams::kGroupTest, static_cast<std::uint64_t>(g)),
                             gopts.threads);
  InferenceResult res = infer_sampled(sample, opts);
  res.group = g;
  res.decomposition = std::move(dec);
  return res;
}

std::vector<InferenceResult> glasso_infer_fit(std::shared_ptr<const GlassoSolver> solver,
                                              const Vector& Y, const GlassoFit& fit,
                                              double sigma, const InferenceOptions& opts,
                                              const GlassoInferenceOptions& gopts) {
  if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
  if (fit.active.empty()) throw SelectionError("the group lasso selected no groups");
  std::vector<InferenceResult> results;
  for (int g : fit.active) results.push_back(glasso_infer_group(solver, Y, fit, g, sigma, opts, gopts));
  return results;
}

std::vector<InferenceResult> glasso_infer(const GroupedDesign& design, const Vector& Y,
                                          double lambda, double sigma,
                                          const InferenceOptions& opts,
                                          const GlassoInferenceOptions& gopts) {
  auto solver = std::make_shared<const GlassoSolver>(design);
  const GlassoFit fit = solver->fit_response(Y, lambda, gopts.solver);
  return glasso_infer_fit(solver, Y, fit, sigma, opts, gopts);
}

double glasso_lambda_for_count(const GlassoSolver& solver, const Vector& y, int target,
                               const GlassoOptions& opts) {
  const GroupedDesign& design = solver.design();
  const int G = design.num_groups();
  if (target < 1 || target > G) throw ConfigError("target", "target group count out of range");
  const Vector Xty = design.X().transpose() * y;
  const double lambda_max = max_group_norm(design, Xty);
  if (!(lambda_max > 0.0)) throw SelectionError("X^T y is zero; no lambda selects any group");

  Vector warm = Vector::Zero(design.p());
  auto count = [&](double lambda) {
    GlassoFit f = solver.fit(Xty, lambda, opts, &warm);
    warm = f.beta;
    return static_cast<int>(f.active.size());
  };

  // Largest lambda with at least m groups, bracketed as (lo, hi): count(lo) >= m > count(hi).
  auto entry = [&](int m, double hi) {
    double lo = hi;
    for (int i = 0; i < 200; ++i) {
      lo *= 0.5;
      if (count(lo) >= m) break;
      hi = lo;
      if (i == 199) throw SelectionError("no lambda selects " + std::to_string(m) + " groups");
    }
    for (int i = 0; i < 100 && hi / lo > 1.0 + 1e-12; ++i) {
      const double mid = std::sqrt(lo * hi);
      if (count(mid) >= m) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return std::pair{lo, hi};
  };

  const auto [lo_a, hi_a] = entry(target, lambda_max);
  (void)hi_a;
  double candidate;
  if (target == G) {
    candidate = 0.5 * lo_a;
  } else {
    const auto [lo_b, hi_b] = entry(target + 1, lo_a);
    (void)lo_b;
    candidate = std::sqrt(lo_a * hi_b);
  }
  if (count(candidate) == target) return candidate;
  if (count(lo_a) == target) return lo_a;
  throw SelectionError("no lambda gives exactly " + std::to_string(target) + " active groups");
}

}  // namespace groupinf
