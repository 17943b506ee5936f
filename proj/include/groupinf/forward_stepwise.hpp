#pragma once

#include "groupinf/interval_set.hpp"
#include "groupinf/projections.hpp"
#include "groupinf/truncated_chi.hpp"

#include <span>
#include <vector>

namespace groupinf {

struct FsOptions {
  // Divide each group score by sqrt(|C_g|). Off by default: designs are
  // expected to arrive with unit-norm columns.
  bool scale_by_group_size = false;
};

/// Ordered forward-stepwise path g_1..g_T with the nested orthonormal bases
/// of X_{S_0} subset ... subset X_{S_T} cached for region construction.
struct FsEvent {
  std::vector<int> path;
  Matrix basis;                   // orthonormal basis of col(X_{S_T})
  std::vector<Index> basis_cols;  // basis of S_k = first basis_cols[k] columns, k = 0..T
  FsOptions options;

  int steps() const { return static_cast<int>(path.size()); }
  auto basis_before(int step) const { return basis.leftCols(basis_cols[static_cast<std::size_t>(step - 1)]); }
  /// Groups selected in the first `step` steps.
  std::vector<int> selected_through(int step) const {
    return {path.begin(), path.begin() + step};
  }
};

enum class FsMode { kSimultaneous, kSequential };

/// Greedy group selection: g_t maximizes ||X_g^T P_perp_{S_{t-1}} Y|| over the
/// unselected groups, lowest index winning ties. Throws SelectionError if
/// X_{S_t} spans R^n before T steps.
FsEvent fs_select(const GroupedDesign& design, const Vector& Y, int T, const FsOptions& opts = {});

/// Quadratic inequalities in r that reproduce steps 1..`steps` of the path
/// when Y is replaced by r U + Y_perp: one per (step k, unselected g).
std::vector<QuadraticConstraint> fs_constraints(const GroupedDesign& design, const FsEvent& event,
                                                const Vector& U, const Vector& Y_perp, int steps);

/// Truncation region for `tested` controlling for `control`, built from the
/// constraints of the first `steps` steps (default: all).
IntervalSet fs_region(const GroupedDesign& design, const Vector& Y, const FsEvent& event,
                      int tested, std::span<const int> control, int steps = -1);

/// Selective p-value and lower bound for every selected group. Simultaneous
/// mode tests g_t against S_T \ g_t using the whole path; sequential mode
/// tests g_t against S_{t-1} using steps 1..t.
std::vector<InferenceResult> fs_infer(const GroupedDesign& design, const Vector& Y, int T,
                                      double sigma, const InferenceOptions& opts, FsMode mode,
                                      const FsOptions& fs_opts = {});

/// Inference for an already computed event (avoids re-running selection).
std::vector<InferenceResult> fs_infer_event(const GroupedDesign& design, const Vector& Y,
                                            const FsEvent& event, double sigma,
                                            const InferenceOptions& opts, FsMode mode);

}  // namespace groupinf
