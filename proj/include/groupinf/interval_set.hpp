#pragma once

#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace groupinf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open interval (lo, hi) on the nonnegative half-line; hi may be +inf.
struct Interval {
  double lo = 0.0;
  double hi = kInf;

  double width() const { return hi - lo; }
  bool contains(double r) const { return lo < r && r < hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint open intervals in (0, inf), kept sorted and
/// merged. Every public operation returns a canonical set: sorted by lo,
/// pairwise disjoint, no two intervals sharing an endpoint, and no interval
/// narrower than the merge tolerance.
class IntervalSet {
public:
  /// Relative width below which an interval is dropped during
  /// canonicalization: width < kMergeTol * max(1, |hi|).
  static constexpr double kMergeTol = 1e-10;

  IntervalSet() = default;
  /// Canonicalizes the given intervals (clipped to (0, inf)).
  explicit IntervalSet(std::vector<Interval> intervals);
  IntervalSet(std::initializer_list<Interval> intervals);

  static IntervalSet positive_half_line() { return IntervalSet{{0.0, kInf}}; }
  static IntervalSet empty_set() { return IntervalSet{}; }

  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }
  std::span<const Interval> intervals() const { return intervals_; }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

  /// True iff r lies strictly inside one of the intervals.
  bool contains(double r) const;

  /// Set restricted to (lo, hi).
  IntervalSet clipped(double lo, double hi) const;

  /// Plain-text form, e.g. "[(0,1),(2,inf)]"; the empty set prints as "[]".
  std::string to_string() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
  std::vector<Interval> intervals_;
};

std::ostream& operator<<(std::ostream& os, const IntervalSet& set);

/// { r > 0 : a r^2 + 2 b r + c > 0 } as at most two open intervals.
///
/// Roots come from the cancellation-free form of the quadratic formula. A
/// discriminant with |b^2 - ac| <= 1e-12 max(b^2, |ac|) is a double root: the
/// set is then (0, inf) for a > 0 (a single tangency point is measure zero)
/// and empty for a < 0.
IntervalSet solve_quadratic_region(double a, double b, double c);

/// Exact intersection of the two sets.
IntervalSet intersect(const IntervalSet& lhs, const IntervalSet& rhs);

/// Intersection of all sets; the empty list yields (0, inf).
IntervalSet intersect(std::span<const IntervalSet> sets);

inline bool contains(const IntervalSet& set, double r) { return set.contains(r); }

/// The inequality a r^2 + 2 b r + c > 0 in the radius r.
struct QuadraticConstraint {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  IntervalSet solve() const { return solve_quadratic_region(a, b, c); }
  bool holds(double r) const { return a * r * r + 2.0 * b * r + c > 0.0; }
};

/// Intersection of the solution sets of all constraints.
IntervalSet solve_all(std::span<const QuadraticConstraint> constraints);

}  // namespace groupinf
