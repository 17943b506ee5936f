#include "groupinf/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <queue>

namespace groupinf {

GaussLegendreRule::GaussLegendreRule(int order) {
  const int n = order;
  nodes_.assign(static_cast<std::size_t>(n), 0.0);
  weights_.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes_[static_cast<std::size_t>(i)] = -z;
    nodes_[static_cast<std::size_t>(n - 1 - i)] = z;
    weights_[static_cast<std::size_t>(i)] = w;
    weights_[static_cast<std::size_t>(n - 1 - i)] = w;
  }
}

namespace {

const GaussLegendreRule& default_rule() {
  static const GaussLegendreRule rule(10);
  return rule;
}

struct Panel {
  double a;
  double b;
  double coarse;  // rule applied to the whole panel
  double fine;    // rule applied to both halves
  double left;
  double right;
  double error() const { return std::abs(fine - coarse); }
  bool operator<(const Panel& other) const { return error() < other.error(); }
};

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, int max_panels) {
  const GaussLegendreRule& rule = default_rule();
  auto make_panel = [&](double lo, double hi, double coarse) {
    const double mid = 0.5 * (lo + hi);
    const double left = rule.apply(f, lo, mid);
    const double right = rule.apply(f, mid, hi);
    return Panel{lo, hi, coarse, left + right, left, right};
  };

  QuadratureResult result;
  if (!(b > a)) return result;

  std::priority_queue<Panel> panels;
  double value = 0.0;
  double error = 0.0;
  const double mid = 0.5 * (a + b);
  for (auto [lo, hi] : {std::pair{a, mid}, std::pair{mid, b}}) {
    Panel p = make_panel(lo, hi, rule.apply(f, lo, hi));
    value += p.fine;
    error += p.error();
    panels.push(p);
  }

  while (error > rel_tol * std::abs(value) && static_cast<int>(panels.size()) < max_panels) {
    const Panel worst = panels.top();
    panels.pop();
    value -= worst.fine;
    error -= worst.error();
    const double m = 0.5 * (worst.a + worst.b);
    Panel lp = make_panel(worst.a, m, worst.left);
    Panel rp = make_panel(m, worst.b, worst.right);
    value += lp.fine + rp.fine;
    error += lp.error() + rp.error();
    panels.push(lp);
    panels.push(rp);
  }

  // Recompute sums to shed accumulated rounding from the running updates.
  value = 0.0;
  error = 0.0;
  result.panels = static_cast<int>(panels.size());
  while (!panels.empty()) {
    value += panels.top().fine;
    error += panels.top().error();
    panels.pop();
  }
  result.value = value;
  result.abs_error = error;
  return result;
}

}  // namespace groupinf
