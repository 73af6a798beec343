#pragma once

#include <utility>
#include <vector>

#include "hfl/common.hpp"
#include "hfl/ir.hpp"

namespace hfl {

// Sets of unsigned w-bit values kept as a small union of disjoint closed
// ranges. Used for the constant-conflict trimming rule and for the
// solver's unsatisfiability reasoning; both only ever need a sound
// over-approximation, so the set collapses to its hull when it fragments.
class IntervalSet {
public:
  Width width = 64;
  std::vector<std::pair<U128, U128>> parts; // sorted, disjoint, non-adjacent

  static IntervalSet none(Width w) { return IntervalSet{w, {}}; }
  static IntervalSet all(Width w) { return range(w, 0, maskOf(w)); }
  static IntervalSet point(Width w, U128 v) { return range(w, v, v); }
  static IntervalSet range(Width w, U128 lo, U128 hi);

  bool empty() const { return parts.empty(); }
  bool full() const {
    return parts.size() == 1 && parts[0].first == 0 &&
           parts[0].second == maskOf(width);
  }
  bool contains(U128 v) const;
  U128 umin() const { return parts.front().first; }
  U128 umax() const { return parts.back().second; }

  IntervalSet intersect(const IntervalSet &o) const;
  IntervalSet unite(const IntervalSet &o) const;
  IntervalSet complement() const;

  // Signed bounds of the set, exact (splits at the sign boundary).
  I128 smin() const;
  I128 smax() const;

  void normalize(); // sort, merge, cap the piece count
};

// Feasible values of x for the comparison `x <kind> c` (or its negation)
// over w-bit values.
IntervalSet compareInterval(CmpKind kind, U128 c, Width w, bool negate);

// Same for `c <kind> x`.
IntervalSet compareIntervalRight(CmpKind kind, U128 c, Width w, bool negate);

// Image of a value set under zext/sext/trunc to the target width.
IntervalSet convertInterval(const IntervalSet &in, Op op, Width from, Width to);

// Bit-level knowledge: bits where mask is 1 have the given value.
struct KnownBits {
  U128 mask = 0;
  U128 value = 0;
  static KnownBits exact(U128 v, Width w) { return {maskOf(w), v & maskOf(w)}; }
  bool mayEqual(U128 c) const { return ((c ^ value) & mask) == 0; }
};

} // namespace hfl
