#pragma once

#include "hfl/common.hpp"
#include "hfl/ir.hpp"

namespace hfl {

// Scalar semantics shared by the concrete interpreter and the concolic
// engine's concrete lane: wrapping arithmetic with total division,
// masked shift amounts, and width-aware comparisons.

inline uint64_t wrapArith(Op op, bool isSigned, Width w, uint64_t a, uint64_t b) {
  U128 x = truncTo(a, w), y = truncTo(b, w);
  switch (op) {
  case Op::Add: return lo64(truncTo(x + y, w));
  case Op::Sub: return lo64(truncTo(x - y, w));
  case Op::Mul: return lo64(truncTo(x * y, w));
  case Op::Div: {
    if (y == 0) return 0;
    if (isSigned) {
      I128 xs = signExtend(a, w), ys = signExtend(b, w);
      I128 q = xs / ys;
      return lo64(truncTo(static_cast<U128>(q), w));
    }
    return lo64(truncTo(x / y, w));
  }
  case Op::Rem: {
    if (y == 0) return 0;
    if (isSigned) {
      I128 xs = signExtend(a, w), ys = signExtend(b, w);
      I128 r = xs % ys;
      return lo64(truncTo(static_cast<U128>(r), w));
    }
    return lo64(truncTo(x % y, w));
  }
  default: return 0;
  }
}

inline uint64_t doShift(Op op, Width w, uint64_t a, uint64_t b) {
  unsigned amt = static_cast<unsigned>(b) & (w - 1);
  U128 x = truncTo(a, w);
  switch (op) {
  case Op::Shl: return lo64(truncTo(x << amt, w));
  case Op::Lshr: return lo64(x >> amt);
  case Op::Ashr: {
    I128 xs = signExtend(a, w);
    return lo64(truncTo(static_cast<U128>(xs >> amt), w));
  }
  default: return 0;
  }
}

inline bool evalCmp(CmpKind k, Width w, uint64_t a, uint64_t b) {
  U128 x = truncTo(a, w), y = truncTo(b, w);
  switch (k) {
  case CmpKind::Eq: return x == y;
  case CmpKind::Ne: return x != y;
  case CmpKind::Ult: return x < y;
  case CmpKind::Ule: return x <= y;
  case CmpKind::Slt: return signExtend(a, w) < signExtend(b, w);
  case CmpKind::Sle: return signExtend(a, w) <= signExtend(b, w);
  }
  return false;
}

} // namespace hfl
