#pragma once

#include <functional>
#include <vector>

namespace groupinf {

/// Fixed-order Gauss-Legendre rule on [-1, 1].
class GaussLegendreRule {
public:
  explicit GaussLegendreRule(int order);

  int order() const { return static_cast<int>(nodes_.size()); }

  template <typename F>
  double apply(const F& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int panels = 0;
};

/// Globally adaptive composite Gauss-Legendre integration: the panel with the
/// largest (coarse vs. bisected) discrepancy is split until the summed
/// discrepancy falls below rel_tol * |value| or max_panels is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, int max_panels = 4000);

}  // namespace groupinf
