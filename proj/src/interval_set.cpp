#include "groupinf/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace groupinf {

namespace {

constexpr double kDiscriminantTol = 1e-12;

std::vector<Interval> canonicalize(std::vector<Interval> in) {
  std::vector<Interval> kept;
  kept.reserve(in.size());
  for (Interval iv : in) {
    iv.lo = std::max(iv.lo, 0.0);
    if (!(iv.hi > iv.lo)) continue;
    kept.push_back(iv);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });

  std::vector<Interval> merged;
  merged.reserve(kept.size());
  for (const Interval& iv : kept) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    } else {
      merged.push_back(iv);
    }
  }

  std::erase_if(merged, [](const Interval& iv) {
    if (std::isinf(iv.hi)) return false;
    return iv.width() < IntervalSet::kMergeTol * std::max(1.0, std::abs(iv.hi));
  });
  return merged;
}

void format_endpoint(std::ostream& os, double x) {
  if (std::isinf(x)) {
    os << "inf";
  } else {
    os << x;
  }
}

}  // namespace

IntervalSet::IntervalSet(std::vector<Interval> intervals)
    : intervals_(canonicalize(std::move(intervals))) {}

IntervalSet::IntervalSet(std::initializer_list<Interval> intervals)
    : intervals_(canonicalize(std::vector<Interval>(intervals))) {}

bool IntervalSet::contains(double r) const {
  // First interval with hi > r is the only candidate.
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), r,
                             [](double v, const Interval& iv) { return v < iv.hi; });
  return it != intervals_.end() && it->contains(r);
}

IntervalSet IntervalSet::clipped(double lo, double hi) const {
  return intersect(*this, IntervalSet{{lo, hi}});
}

std::string IntervalSet::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (i) os << ',';
    os << '(';
    format_endpoint(os, intervals_[i].lo);
    os << ',';
    format_endpoint(os, intervals_[i].hi);
    os << ')';
  }
  os << ']';
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const IntervalSet& set) {
  return os << set.to_string();
}

IntervalSet solve_quadratic_region(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return c > 0.0 ? IntervalSet::positive_half_line() : IntervalSet{};
    const double root = -c / (2.0 * b);
    if (b > 0.0) return IntervalSet{{root, kInf}};
    return IntervalSet{{0.0, root}};
  }

  const double disc = b * b - a * c;
  const double scale = std::max(b * b, std::abs(a * c));
  if (disc < 0.0 || std::abs(disc) <= kDiscriminantTol * scale) {
    return a > 0.0 ? IntervalSet::positive_half_line() : IntervalSet{};
  }

  const double q = -(b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = c / q;
  if (r1 > r2) std::swap(r1, r2);

  if (a > 0.0) return IntervalSet{{0.0, r1}, {r2, kInf}};
  return IntervalSet{{r1, r2}};
}

IntervalSet intersect(const IntervalSet& lhs, const IntervalSet& rhs) {
  std::vector<Interval> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < lhs.size() && j < rhs.size()) {
    const Interval& x = lhs[i];
    const Interval& y = rhs[j];
    const double lo = std::max(x.lo, y.lo);
    const double hi = std::min(x.hi, y.hi);
    if (lo < hi) out.push_back({lo, hi});
    if (x.hi < y.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet intersect(std::span<const IntervalSet> sets) {
  IntervalSet acc = IntervalSet::positive_half_line();
  for (const IntervalSet& s : sets) {
    acc = intersect(acc, s);
    if (acc.empty()) break;
  }
  return acc;
}

IntervalSet solve_all(std::span<const QuadraticConstraint> constraints) {
  IntervalSet acc = IntervalSet::positive_half_line();
  for (const QuadraticConstraint& q : constraints) {
    acc = intersect(acc, q.solve());
    if (acc.empty()) break;
  }
  return acc;
}

}  // namespace groupinf
