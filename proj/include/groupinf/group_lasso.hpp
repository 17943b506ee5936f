#pragma once

#include "groupinf/projections.hpp"
#include "groupinf/truncated_chi.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace groupinf {

struct GlassoOptions {
  double kkt_tol = 1e-8;  // relative to max(lambda, max_g ||X_g^T y||)
  int max_sweeps = 100000;
};

struct GlassoFit {
  Vector beta;
  std::vector<int> active;
  double lambda = 0.0;
  double kkt_residual = 0.0;  // absolute, max over groups
  double scale = 0.0;         // the problem scale the tolerance is relative to
  int sweeps = 0;
};

/// Group active iff ||beta_g|| > 1e-8 ||beta|| + 1e-12.
std::vector<int> active_groups(const GroupedDesign& design, const Vector& beta);

/// max over groups of the stationarity violation of
/// 1/2 ||y - X beta||^2 + lambda sum_g ||beta_g||.
double kkt_residual(const GroupedDesign& design, const Vector& y, const Vector& beta,
                    double lambda);

double glasso_objective(const GroupedDesign& design, const Vector& y, const Vector& beta,
                        double lambda);

/// Cyclic block coordinate descent in Gram form. Each block update is exact:
/// the new ||beta_g|| solves a one-dimensional secular equation in the
/// eigenbasis of X_g^T X_g. Precomputes everything that depends only on X.
class GlassoSolver {
public:
  /// Throws ConfigError if some X_g is column-rank deficient.
  explicit GlassoSolver(const GroupedDesign& design);

  /// Fit from X^T y. Throws ConvergenceError after max_sweeps.
  GlassoFit fit(const Vector& Xty, double lambda, const GlassoOptions& opts = {},
                const Vector* warm_start = nullptr) const;
  GlassoFit fit_response(const Vector& y, double lambda, const GlassoOptions& opts = {},
                         const Vector* warm_start = nullptr) const;

  const GroupedDesign& design() const { return *design_; }

private:
  struct Block {
    Matrix W;       // eigenvectors of X_g^T X_g
    Vector h;       // eigenvalues
    Matrix gram;    // X_g^T X_g
    Matrix column;  // X^T X_g (p x |C_g|)
    Index start = 0;
    bool contiguous = false;
  };
  Index max_group_size_ = 0;
  std::shared_ptr<const GroupedDesign> design_;
  std::vector<Block> blocks_;
};

GlassoFit glasso_fit(const GroupedDesign& design, const Vector& y, double lambda,
                     const GlassoOptions& opts = {});

/// y' -> (active set of the fit at y' equals `reference`). Solver failures
/// give an empty optional.
std::function<std::optional<bool>(const Vector&)> glasso_event_oracle(
    std::shared_ptr<const GlassoSolver> solver, double lambda, std::vector<int> reference,
    Vector warm_start = {}, GlassoOptions opts = {});

struct GlassoInferenceOptions {
  int B = 20000;
  std::uint64_t seed = 1;
  int threads = 1;
  GlassoOptions solver{};
};

/// Importance-sampled p-value and lower bound for each group in the fitted
/// support. Throws SelectionError if the support is empty.
std::vector<InferenceResult> glasso_infer(const GroupedDesign& design, const Vector& Y,
                                          double lambda, double sigma,
                                          const InferenceOptions& opts,
                                          const GlassoInferenceOptions& gopts);

/// Same, reusing a solver and the fit at Y.
std::vector<InferenceResult> glasso_infer_fit(std::shared_ptr<const GlassoSolver> solver,
                                              const Vector& Y, const GlassoFit& fit,
                                              double sigma, const InferenceOptions& opts,
                                              const GlassoInferenceOptions& gopts);

/// One group of the fitted support; throws SelectionError if g is not in it.
InferenceResult glasso_infer_group(const std::shared_ptr<const GlassoSolver>& solver, const Vector& Y,
                                   const GlassoFit& fit, int g, double sigma, const InferenceOptions& opts,
                                   const GlassoInferenceOptions& gopts);

/// lambda with exactly `target` active groups: the geometric midpoint of the
/// lambda range where the count is `target`, located by bisection. Throws
/// SelectionError when no such lambda is found.
double glasso_lambda_for_count(const GlassoSolver& solver, const Vector& y, int target,
                               const GlassoOptions& opts = {});

}  // namespace groupinf
