#include "hfl/intervals.hpp"

#include <algorithm>

namespace hfl {

IntervalSet IntervalSet::range(Width w, U128 lo, U128 hi) {
  IntervalSet s;
  s.width = w;
  lo &= maskOf(w);
  hi &= maskOf(w);
  if (lo <= hi) s.parts.push_back({lo, hi});
  return s;
}

bool IntervalSet::contains(U128 v) const {
  for (auto &[lo, hi] : parts)
    if (v >= lo && v <= hi) return true;
  return false;
}

void IntervalSet::normalize() {
  std::sort(parts.begin(), parts.end());
  std::vector<std::pair<U128, U128>> out;
  for (auto &pr : parts) {
    if (!out.empty() && pr.first <= out.back().second + 1 &&
        out.back().second != maskOf(width))
      out.back().second = std::max(out.back().second, pr.second);
    else if (!out.empty() && pr.first <= out.back().second)
      out.back().second = std::max(out.back().second, pr.second);
    else
      out.push_back(pr);
  }
  // Cap fragmentation: hull beyond 8 pieces keeps everything O(1)-ish
  // while remaining a sound over-approximation.
  if (out.size() > 8) out = {{out.front().first, out.back().second}};
  parts = std::move(out);
}

IntervalSet IntervalSet::intersect(const IntervalSet &o) const {
  IntervalSet r = none(width);
  for (auto &a : parts)
    for (auto &b : o.parts) {
      U128 lo = std::max(a.first, b.first);
      U128 hi = std::min(a.second, b.second);
      if (lo <= hi) r.parts.push_back({lo, hi});
    }
  r.normalize();
  return r;
}

IntervalSet IntervalSet::unite(const IntervalSet &o) const {
  IntervalSet r = *this;
  r.parts.insert(r.parts.end(), o.parts.begin(), o.parts.end());
  r.normalize();
  return r;
}

IntervalSet IntervalSet::complement() const {
  IntervalSet r = none(width);
  U128 next = 0;
  bool open = true;
  for (auto &[lo, hi] : parts) {
    if (lo > next) r.parts.push_back({next, lo - 1});
    if (hi == maskOf(width)) { open = false; break; }
    next = hi + 1;
  }
  if (open) r.parts.push_back({next, maskOf(width)});
  if (parts.empty()) return all(width);
  r.normalize();
  return r;
}

I128 IntervalSet::smin() const {
  // Smallest signed value: prefer values with the sign bit set.
  U128 sign = U128{1} << (width - 1);
  I128 best = 0;
  bool found = false;
  for (auto &[lo, hi] : parts) {
    if (hi >= sign) {
      U128 negLo = std::max(lo, sign);
      I128 v = signExtend(negLo, width);
      if (!found || v < best) { best = v; found = true; }
    }
  }
  if (found) return best;
  return signExtend(umin(), width);
}

I128 IntervalSet::smax() const {
  U128 sign = U128{1} << (width - 1);
  I128 best = 0;
  bool found = false;
  for (auto &[lo, hi] : parts) {
    if (lo < sign) {
      U128 posHi = std::min(hi, sign - 1);
      I128 v = static_cast<I128>(posHi);
      if (!found || v > best) { best = v; found = true; }
    }
  }
  if (found) return best;
  return signExtend(umax(), width);
}

IntervalSet compareInterval(CmpKind kind, U128 c, Width w, bool negate) {
  c &= maskOf(w);
  U128 top = maskOf(w);
  U128 sign = w >= 128 ? (U128{1} << 127) : (U128{1} << (w - 1));
  IntervalSet r = IntervalSet::none(w);
  switch (kind) {
  case CmpKind::Eq:
    r = IntervalSet::point(w, c);
    break;
  case CmpKind::Ne:
    r = IntervalSet::point(w, c).complement();
    break;
  case CmpKind::Ult:
    r = c == 0 ? IntervalSet::none(w) : IntervalSet::range(w, 0, c - 1);
    break;
  case CmpKind::Ule:
    r = IntervalSet::range(w, 0, c);
    break;
  case CmpKind::Slt:
  case CmpKind::Sle: {
    I128 cs = signExtend(c, w);
    if (kind == CmpKind::Slt) cs -= 1; // x <= cs
    // All v with signed(v) <= cs.
    if (cs < signExtend(sign, w)) {
      r = IntervalSet::none(w);
    } else if (cs < 0) {
      r = IntervalSet::range(w, sign, static_cast<U128>(cs) & top);
    } else {
      r = IntervalSet::range(w, 0, static_cast<U128>(cs));
      r = r.unite(IntervalSet::range(w, sign, top));
    }
    break;
  }
  }
  if (negate) r = r.complement();
  return r;
}

IntervalSet convertInterval(const IntervalSet &in, Op op, Width from, Width to) {
  if (op == Op::Zext) {
    IntervalSet out = in;
    out.width = to;
    return out; // identical values, wider encoding
  }
  if (op == Op::Sext) {
    IntervalSet out = IntervalSet::none(to);
    U128 signBit = U128{1} << (from - 1);
    U128 shiftUp = maskOf(to) - maskOf(from); // 2^to - 2^from
    for (auto &[lo, hi] : in.parts) {
      U128 posHi = std::min<U128>(hi, signBit - 1);
      if (lo <= posHi) out.parts.push_back({lo, posHi});
      U128 negLo = std::max(lo, signBit);
      if (negLo <= hi) out.parts.push_back({negLo + shiftUp, hi + shiftUp});
    }
    out.normalize();
    return out;
  }
  if (op == Op::Trunc) {
    if (!in.empty() && in.umax() <= maskOf(to)) {
      IntervalSet out = in;
      out.width = to;
      return out;
    }
    return IntervalSet::all(to);
  }
  return IntervalSet::all(to);
}

IntervalSet compareIntervalRight(CmpKind kind, U128 c, Width w, bool negate) {
  // `c kind x`  ==  rewritten comparison on x.
  switch (kind) {
  case CmpKind::Eq:
  case CmpKind::Ne:
    return compareInterval(kind, c, w, negate);
  case CmpKind::Ult: // c < x  ==  !(x <= c)
    return compareInterval(CmpKind::Ule, c, w, !negate);
  case CmpKind::Ule: // c <= x ==  !(x < c)
    return compareInterval(CmpKind::Ult, c, w, !negate);
  case CmpKind::Slt:
    return compareInterval(CmpKind::Sle, c, w, !negate);
  case CmpKind::Sle:
    return compareInterval(CmpKind::Slt, c, w, !negate);
  }
  return IntervalSet::all(w);
}

} // namespace hfl
