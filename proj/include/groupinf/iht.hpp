#pragma once

#include "groupinf/interval_set.hpp"
#include "groupinf/projections.hpp"
#include "groupinf/truncated_chi.hpp"

#include <utility>
#include <vector>

namespace groupinf {

struct IhtConfig {
  int k_groups = 1;
  int T = 1;
  std::vector<double> eta;  // eta_1..eta_T, all positive
  Vector beta0;             // empty means the zero vector

  /// Same step size at every iteration.
  static IhtConfig constant_step(int k_groups, int T, double eta);
  void validate(const GroupedDesign& design) const;
};

/// Supports S_1..S_T chosen by group iterative hard thresholding, plus the
/// pre-threshold iterates beta~_t for diagnostics and recomputation checks.
struct IhtEvent {
  std::vector<std::vector<int>> models;  // each sorted ascending
  std::vector<Vector> iterates;          // beta~_1..beta~_T

  int iterations() const { return static_cast<int>(models.size()); }
  const std::vector<int>& final_model() const { return models.back(); }
};

/// beta~_t = beta_{t-1} - (eta_t / n) X^T (X beta_{t-1} - Y), keeping the k
/// groups of largest norm (lowest index wins ties).
IhtEvent iht_select(const GroupedDesign& design, const Vector& Y, const IhtConfig& config);

/// (c_t, d_t) with beta~_t = r c_t + d_t when Y is replaced by r U + Y_perp
/// and every thresholding decision follows `event`.
std::vector<std::pair<Vector, Vector>> iht_affine_coeffs(const GroupedDesign& design,
                                                         const IhtEvent& event,
                                                         const IhtConfig& config, const Vector& U,
                                                         const Vector& Y_perp);

/// One constraint per (t, g in S_t, h not in S_t) for iterations 1..`steps`.
std::vector<QuadraticConstraint> iht_constraints(
    const GroupedDesign& design, const IhtEvent& event,
    const std::vector<std::pair<Vector, Vector>>& coeffs, int steps);

/// Truncation region for `tested` in S_T, controlling for S_T \ tested.
IntervalSet iht_region(const GroupedDesign& design, const Vector& Y, const IhtEvent& event,
                       const IhtConfig& config, int tested);

std::vector<InferenceResult> iht_infer(const GroupedDesign& design, const Vector& Y,
                                       const IhtConfig& config, double sigma,
                                       const InferenceOptions& opts);

std::vector<InferenceResult> iht_infer_event(const GroupedDesign& design, const Vector& Y,
                                             const IhtEvent& event, const IhtConfig& config,
                                             double sigma, const InferenceOptions& opts);

}  // namespace groupinf
