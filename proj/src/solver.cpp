#include "hfl/solver.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace hfl {

const char *solveStatusName(SolveStatus s) {
  switch (s) {
  case SolveStatus::Sat: return "SAT";
  case SolveStatus::Unsat: return "UNSAT";
  case SolveStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

bool truthy(const SymRef &c, std::span<const uint8_t> bytes) {
  return (evalSym(*c, bytes) & 1) != 0;
}

// ---------------------------------------------------------------------
// Normalized comparison: strip width-1 xor-with-1 wrappers.
struct NormCmp {
  const SymExpr *cmp = nullptr;
  bool negate = false;
};

std::optional<NormCmp> normalizeCmp(const SymExpr &e) {
  const SymExpr *cur = &e;
  bool neg = false;
  while (cur->kind == SymExpr::K::Bit && cur->op == Op::Xor && cur->width == 1) {
    const SymExpr *a = cur->a.get(), *b = cur->b.get();
    if (a->kind == SymExpr::K::Const) {
      neg ^= (a->cval & 1) != 0;
      cur = b;
    } else if (b->kind == SymExpr::K::Const) {
      neg ^= (b->cval & 1) != 0;
      cur = a;
    } else {
      return std::nullopt;
    }
  }
  if (cur->kind != SymExpr::K::Cmp) return std::nullopt;
  return NormCmp{cur, neg};
}

// ---------------------------------------------------------------------
// Contiguous byte group: an InputByte or a little-endian concat of
// consecutive offsets.
struct Group {
  uint32_t offset = 0;
  uint32_t nbytes = 0;
  Width width() const { return static_cast<Width>(8 * nbytes); }
  uint32_t key() const { return offset | (nbytes << 20); }
};

std::optional<Group> matchGroup(const SymExpr &e) {
  if (e.kind == SymExpr::K::InputByte) return Group{e.offset, 1};
  if (e.kind != SymExpr::K::Concat) return std::nullopt;
  Group g;
  for (size_t i = 0; i < e.parts.size(); ++i) {
    auto &p = *e.parts[i];
    if (p.kind != SymExpr::K::InputByte) return std::nullopt;
    if (i == 0) g.offset = p.offset;
    else if (p.offset != g.offset + i) return std::nullopt;
  }
  g.nbytes = static_cast<uint32_t>(e.parts.size());
  return g;
}

// ---------------------------------------------------------------------
// Invertible chain over a single group: add/sub/xor constants, odd
// multiplications, extensions and truncations.
struct ChainStep {
  enum class K { AddC, SubC, RsubC, XorC, MulOdd, Zext, Sext, Trunc } k;
  U128 c = 0;
  Width from = 0, to = 0;   // widths below/above this step
  const SymExpr *child = nullptr;
};

struct Chain {
  std::vector<ChainStep> steps; // top to bottom
  Group group;
  Width topWidth = 0;
};

U128 mulInverse(U128 c, Width w) {
  // Newton iteration: inverse of odd c modulo 2^w.
  U128 x = c; // correct to 3 bits
  for (int i = 0; i < 7; ++i) x = truncTo(x * (2 - c * x), 128);
  return truncTo(x, w);
}

std::optional<Chain> matchChain(const SymExpr &top) {
  Chain ch;
  const SymExpr *cur = &top;
  ch.topWidth = top.width;
  for (int depth = 0; depth < 64; ++depth) {
    if (auto g = matchGroup(*cur)) {
      ch.group = *g;
      return ch;
    }
    ChainStep st;
    st.to = cur->width;
    switch (cur->kind) {
    case SymExpr::K::Bin: {
      const SymExpr *a = cur->a.get(), *b = cur->b.get();
      const SymExpr *cSide = nullptr, *xSide = nullptr;
      if (a->support.empty()) { cSide = a; xSide = b; }
      else if (b->support.empty()) { cSide = b; xSide = a; }
      else return std::nullopt;
      U128 cv = evalSym(*cSide, {});
      if (cur->op == Op::Add) st.k = ChainStep::K::AddC;
      else if (cur->op == Op::Sub && cSide == b) st.k = ChainStep::K::SubC;
      else if (cur->op == Op::Sub) st.k = ChainStep::K::RsubC; // c - x
      else if (cur->op == Op::Mul && (cv & 1)) st.k = ChainStep::K::MulOdd;
      else return std::nullopt;
      st.c = cv;
      st.from = xSide->width;
      st.child = xSide;
      break;
    }
    case SymExpr::K::Bit: {
      if (cur->op != Op::Xor) return std::nullopt;
      const SymExpr *a = cur->a.get(), *b = cur->b.get();
      const SymExpr *cSide = a->support.empty() ? a
                           : b->support.empty() ? b : nullptr;
      if (!cSide) return std::nullopt;
      st.k = ChainStep::K::XorC;
      st.c = evalSym(*cSide, {});
      st.child = cSide == a ? b : a;
      st.from = st.child->width;
      break;
    }
    case SymExpr::K::Ext:
      st.k = cur->op == Op::Zext ? ChainStep::K::Zext : ChainStep::K::Sext;
      st.child = cur->a.get();
      st.from = st.child->width;
      break;
    case SymExpr::K::Trunc:
      st.k = ChainStep::K::Trunc;
      st.child = cur->a.get();
      st.from = st.child->width;
      break;
    default:
      return std::nullopt;
    }
    ch.steps.push_back(st);
    cur = st.child;
  }
  return std::nullopt;
}

// Candidate top-level values satisfying `x <kind> c` (or its negation):
// boundary values first (they survive extension inverses), extremes after.
std::vector<U128> pickTargets(CmpKind kind, bool negate, U128 c, Width w) {
  U128 mask = maskOf(w);
  c &= mask;
  U128 smin = U128{1} << (w - 1), smax = mask >> 1;
  std::vector<U128> out;
  if (!negate) {
    switch (kind) {
    case CmpKind::Eq: out = {c}; break;
    case CmpKind::Ne: out = {c ^ 1, truncTo(c + 1, w)}; break;
    case CmpKind::Ult:
      if (c != 0) out = {c - 1, 0};
      break;
    case CmpKind::Ule: out = {c, 0}; break;
    case CmpKind::Slt:
      if (c != smin) out = {truncTo(c - 1, w), 0, smin};
      break;
    case CmpKind::Sle: out = {c, 0, smin}; break;
    }
  } else {
    switch (kind) {
    case CmpKind::Eq: out = {c ^ 1, truncTo(c + 1, w)}; break;
    case CmpKind::Ne: out = {c}; break;
    case CmpKind::Ult: out = {c, mask}; break;       // x >= c
    case CmpKind::Ule:
      if (c != mask) out = {truncTo(c + 1, w), mask};
      break;
    case CmpKind::Slt: out = {c, smax}; break;       // x >= c signed
    case CmpKind::Sle:
      if (c != smax) out = {truncTo(c + 1, w), smax};
      break;
    }
  }
  return out;
}

// Map a top value back to the group value through the chain.
std::optional<U128> invertChain(const Chain &ch, U128 t,
                                std::span<const uint8_t> hint) {
  for (auto &st : ch.steps) {
    Width wTo = st.to, wFrom = st.from;
    switch (st.k) {
    case ChainStep::K::AddC: t = truncTo(t - st.c, wTo); break;
    case ChainStep::K::SubC: t = truncTo(t + st.c, wTo); break;
    case ChainStep::K::RsubC: t = truncTo(st.c - t, wTo); break;
    case ChainStep::K::XorC: t = truncTo(t ^ st.c, wTo); break;
    case ChainStep::K::MulOdd:
      t = truncTo(t * mulInverse(st.c, wTo), wTo);
      break;
    case ChainStep::K::Zext:
      if (t > maskOf(wFrom)) return std::nullopt;
      break;
    case ChainStep::K::Sext: {
      U128 low = truncTo(t, wFrom);
      if (truncTo(static_cast<U128>(signExtend(low, wFrom)), wTo) != t)
        return std::nullopt;
      t = low;
      break;
    }
    case ChainStep::K::Trunc: {
      // free high bits come from the hint's value of the wider child
      U128 hv = evalSym(*st.child, hint);
      t = (hv & ~maskOf(wTo)) | truncTo(t, wTo);
      break;
    }
    }
  }
  return truncTo(t, ch.group.width());
}

// ---------------------------------------------------------------------
// Abstract evaluation: value intervals plus known bits.
struct AbsVal {
  IntervalSet iv = IntervalSet::all(64);
  KnownBits kb;
};

using RefineStore = std::map<uint32_t, IntervalSet>;

int highestBit(U128 v) {
  int b = -1;
  while (v) { ++b; v >>= 1; }
  return b;
}

AbsVal evalAbs(const SymExpr &e, const RefineStore &store) {
  AbsVal r;
  Width w = e.width;
  auto top = [&]() {
    AbsVal t;
    t.iv = IntervalSet::all(w);
    t.kb = {};
    return t;
  };
  switch (e.kind) {
  case SymExpr::K::InputByte: {
    r.iv = IntervalSet::all(8);
    auto it = store.find(Group{e.offset, 1}.key());
    if (it != store.end()) r.iv = it->second;
    return r;
  }
  case SymExpr::K::Const:
    r.iv = IntervalSet::point(w, e.cval);
    r.kb = KnownBits::exact(e.cval, w);
    return r;
  case SymExpr::K::Concat: {
    U128 lo = 0, hi = 0;
    U128 km = 0, kv = 0;
    bool groupable = true;
    for (size_t i = 0; i < e.parts.size(); ++i) {
      AbsVal p = evalAbs(*e.parts[i], store);
      if (p.iv.empty()) { r.iv = IntervalSet::none(w); return r; }
      lo |= p.iv.umin() << (8 * i);
      hi |= p.iv.umax() << (8 * i);
      km |= (p.kb.mask & 0xFF) << (8 * i);
      kv |= (p.kb.value & 0xFF) << (8 * i);
      groupable &= e.parts[i]->kind == SymExpr::K::InputByte;
    }
    r.iv = IntervalSet::range(w, lo, hi);
    r.kb = {km, kv};
    if (groupable) {
      if (auto g = matchGroup(e)) {
        auto it = store.find(g->key());
        if (it != store.end()) r.iv = r.iv.intersect(it->second);
      }
    }
    return r;
  }
  case SymExpr::K::Bin: {
    AbsVal a = evalAbs(*e.a, store), b = evalAbs(*e.b, store);
    if (a.iv.empty() || b.iv.empty()) { r.iv = IntervalSet::none(w); return r; }
    U128 mask = maskOf(w);
    U128 alo = a.iv.umin(), ahi = a.iv.umax();
    U128 blo = b.iv.umin(), bhi = b.iv.umax();
    switch (e.op) {
    case Op::Add:
      if (ahi <= mask - bhi) {
        r.iv = IntervalSet::range(w, alo + blo, ahi + bhi);
        return r;
      }
      return top();
    case Op::Sub:
      if (alo >= bhi) {
        r.iv = IntervalSet::range(w, alo - bhi, ahi - blo);
        return r;
      }
      return top();
    case Op::Mul:
      if (ahi == 0 || bhi <= mask / ahi) {
        r.iv = IntervalSet::range(w, alo * blo, ahi * bhi);
        return r;
      }
      return top();
    case Op::Div:
      if (e.isSigned) return top();
      if (blo >= 1) r.iv = IntervalSet::range(w, alo / bhi, ahi / blo);
      else r.iv = IntervalSet::range(w, 0, ahi); // /0 yields 0
      return r;
    case Op::Rem: {
      if (e.isSigned) return top();
      U128 hi = bhi == 0 ? 0 : std::min(ahi, bhi - 1);
      r.iv = IntervalSet::range(w, 0, hi);
      return r;
    }
    default:
      return top();
    }
  }
  case SymExpr::K::Shift: {
    AbsVal a = evalAbs(*e.a, store), b = evalAbs(*e.b, store);
    if (a.iv.empty() || b.iv.empty()) { r.iv = IntervalSet::none(w); return r; }
    if (b.iv.umin() != b.iv.umax()) return top();
    unsigned amt = static_cast<unsigned>(b.iv.umin()) & (w - 1);
    U128 alo = a.iv.umin(), ahi = a.iv.umax();
    switch (e.op) {
    case Op::Shl:
      if (highestBit(ahi) + static_cast<int>(amt) < w) {
        r.iv = IntervalSet::range(w, alo << amt, ahi << amt);
        // the low amt bits are known zero
        r.kb.mask = amt ? maskOf(static_cast<Width>(amt)) : 0;
        r.kb.value = 0;
        return r;
      }
      return top();
    case Op::Lshr:
      r.iv = IntervalSet::range(w, alo >> amt, ahi >> amt);
      return r;
    case Op::Ashr: {
      U128 sign = U128{1} << (w - 1);
      if (ahi < sign) {
        r.iv = IntervalSet::range(w, alo >> amt, ahi >> amt);
        return r;
      }
      return top();
    }
    default:
      return top();
    }
  }
  case SymExpr::K::Bit: {
    AbsVal a = evalAbs(*e.a, store), b = evalAbs(*e.b, store);
    if (a.iv.empty() || b.iv.empty()) { r.iv = IntervalSet::none(w); return r; }
    U128 ahi = a.iv.umax(), bhi = b.iv.umax();
    U128 alo = a.iv.umin(), blo = b.iv.umin();
    switch (e.op) {
    case Op::And: {
      r.iv = IntervalSet::range(w, 0, std::min(ahi, bhi));
      U128 zeros = (~a.kb.value & a.kb.mask) | (~b.kb.value & b.kb.mask);
      U128 ones = (a.kb.value & a.kb.mask) & (b.kb.value & b.kb.mask);
      r.kb = {zeros | ones, ones};
      return r;
    }
    case Op::Or: {
      int hb = highestBit(ahi | bhi);
      U128 hi = hb < 0 ? 0 : (hb + 1 >= 128 ? ~U128{0} : (U128{1} << (hb + 1)) - 1);
      r.iv = IntervalSet::range(w, std::max(alo, blo), truncTo(hi, w));
      U128 ones = (a.kb.value & a.kb.mask) | (b.kb.value & b.kb.mask);
      U128 zeros = (~a.kb.value & a.kb.mask) & (~b.kb.value & b.kb.mask);
      r.kb = {zeros | ones, ones};
      return r;
    }
    case Op::Xor: {
      int hb = highestBit(ahi | bhi);
      U128 hi = hb < 0 ? 0 : (hb + 1 >= 128 ? ~U128{0} : (U128{1} << (hb + 1)) - 1);
      r.iv = IntervalSet::range(w, 0, truncTo(hi, w));
      U128 m = a.kb.mask & b.kb.mask;
      r.kb = {m, (a.kb.value ^ b.kb.value) & m};
      return r;
    }
    default:
      return top();
    }
  }
  case SymExpr::K::Cmp: {
    AbsVal a = evalAbs(*e.a, store), b = evalAbs(*e.b, store);
    Width aw = e.a->width;
    auto decide = [&](int v) {
      r.iv = IntervalSet::point(1, static_cast<U128>(v));
      r.kb = KnownBits::exact(static_cast<U128>(v), 1);
      return r;
    };
    auto topBool = [&]() {
      r.iv = IntervalSet::range(1, 0, 1);
      return r;
    };
    if (a.iv.empty() || b.iv.empty()) return decide(0); // vacuous
    switch (e.cmp) {
    case CmpKind::Eq: {
      if (a.iv.intersect(b.iv).empty()) return decide(0);
      // known-bits conflict also decides inequality
      U128 m = a.kb.mask & b.kb.mask;
      if ((a.kb.value ^ b.kb.value) & m) return decide(0);
      if (a.iv.umin() == a.iv.umax() && b.iv.umin() == b.iv.umax() &&
          a.iv.umin() == b.iv.umin())
        return decide(1);
      return topBool();
    }
    case CmpKind::Ne: {
      if (a.iv.intersect(b.iv).empty()) return decide(1);
      U128 m = a.kb.mask & b.kb.mask;
      if ((a.kb.value ^ b.kb.value) & m) return decide(1);
      if (a.iv.umin() == a.iv.umax() && b.iv.umin() == b.iv.umax() &&
          a.iv.umin() == b.iv.umin())
        return decide(0);
      return topBool();
    }
    case CmpKind::Ult:
      if (a.iv.umax() < b.iv.umin()) return decide(1);
      if (a.iv.umin() >= b.iv.umax()) return decide(0);
      return topBool();
    case CmpKind::Ule:
      if (a.iv.umax() <= b.iv.umin()) return decide(1);
      if (a.iv.umin() > b.iv.umax()) return decide(0);
      return topBool();
    case CmpKind::Slt:
      if (a.iv.smax() < b.iv.smin()) return decide(1);
      if (a.iv.smin() >= b.iv.smax()) return decide(0);
      return topBool();
    case CmpKind::Sle:
      if (a.iv.smax() <= b.iv.smin()) return decide(1);
      if (a.iv.smin() > b.iv.smax()) return decide(0);
      return topBool();
    }
    (void)aw;
    return topBool();
  }
  case SymExpr::K::Ext: {
    AbsVal a = evalAbs(*e.a, store);
    r.iv = convertInterval(a.iv, e.op, e.a->width, w);
    if (e.op == Op::Zext) {
      r.kb = a.kb;
      r.kb.mask |= maskOf(w) & ~maskOf(e.a->width); // высокие bits known zero
      r.kb.value &= maskOf(e.a->width);
    }
    return r;
  }
  case SymExpr::K::Trunc: {
    AbsVal a = evalAbs(*e.a, store);
    r.iv = convertInterval(a.iv, Op::Trunc, e.a->width, w);
    r.kb = {a.kb.mask & maskOf(w), a.kb.value & maskOf(w)};
    return r;
  }
  }
  return top();
}

// Refine the store from a comparison between a zext/identity chain over a
// group and an input-free constant.
void refineFromCmp(const SymExpr &e, bool negate, RefineStore &store) {
  const SymExpr *lhs = e.a.get(), *rhs = e.b.get();
  for (int side = 0; side < 2; ++side) {
    const SymExpr *gs = side == 0 ? lhs : rhs;
    const SymExpr *cs = side == 0 ? rhs : lhs;
    if (!cs->support.empty()) continue;
    U128 c = evalSym(*cs, {});
    // unwrap zext chain
    const SymExpr *cur = gs;
    while (cur->kind == SymExpr::K::Ext && cur->op == Op::Zext)
      cur = cur->a.get();
    auto g = matchGroup(*cur);
    if (!g) continue;
    Width gw = g->width();
    IntervalSet feas =
        side == 0 ? compareInterval(e.cmp, c, gs->width, negate)
                  : compareIntervalRight(e.cmp, c, gs->width, negate);
    // map back through the zext: group values are the low-width members
    IntervalSet gset = feas.intersect(IntervalSet::range(gs->width, 0, maskOf(gw)));
    IntervalSet narrowed = IntervalSet::none(gw);
    for (auto &[lo, hi] : gset.parts) narrowed.parts.push_back({lo, hi});
    narrowed.normalize();
    auto it = store.find(g->key());
    if (it == store.end()) store.emplace(g->key(), narrowed);
    else it->second = it->second.intersect(narrowed);
    return;
  }
}

} // namespace

SolveResult solve(std::span<const SymRef> constraints,
                  std::span<const uint8_t> hint, uint32_t inputLen,
                  const SolverConfig &cfg, Rng &rng) {
  SolveResult res;
  std::vector<uint8_t> base(hint.begin(), hint.end());
  base.resize(inputLen, 0);

  auto evalAll = [&](const std::vector<uint8_t> &bytes) {
    res.work += constraints.size();
    for (auto &c : constraints)
      if (!truthy(c, bytes)) return false;
    return true;
  };

  // Unsatisfied conjuncts under the hint.
  std::vector<const SymExpr *> unsat;
  std::vector<uint16_t> unsatSupport;
  res.work += constraints.size();
  for (auto &c : constraints)
    if (!truthy(c, base)) {
      unsat.push_back(c.get());
      unsatSupport.insert(unsatSupport.end(), c->support.begin(),
                          c->support.end());
    }
  std::sort(unsatSupport.begin(), unsatSupport.end());
  unsatSupport.erase(std::unique(unsatSupport.begin(), unsatSupport.end()),
                     unsatSupport.end());
  res.support = unsatSupport;

  if (unsat.empty()) {
    res.status = SolveStatus::Sat;
    res.witness = base;
    return res;
  }

  // (a) exact inversion of affine/invertible chains. A disjunction of
  // comparisons offers one alternative per arm; each comparison offers a
  // few candidate target values.
  {
    struct Alt { const SymExpr *cmp; bool negate; };
    // Collect comparison alternatives: Or splits, negated And splits.
    auto alternatives = [](const SymExpr &e) {
      std::vector<Alt> out;
      auto walk = [&](auto &&self, const SymExpr *cur, bool neg) -> void {
        if (out.size() >= 4) return;
        while (cur->kind == SymExpr::K::Bit && cur->op == Op::Xor &&
               cur->width == 1) {
          const SymExpr *x = cur->a.get(), *y = cur->b.get();
          if (x->kind == SymExpr::K::Const) { neg ^= (x->cval & 1) != 0; cur = y; }
          else if (y->kind == SymExpr::K::Const) { neg ^= (y->cval & 1) != 0; cur = x; }
          else return;
        }
        if (cur->kind == SymExpr::K::Cmp) {
          out.push_back({cur, neg});
          return;
        }
        if (cur->kind == SymExpr::K::Bit && cur->width == 1 &&
            ((cur->op == Op::Or && !neg) || (cur->op == Op::And && neg))) {
          self(self, cur->a.get(), neg);
          self(self, cur->b.get(), neg);
        }
      };
      walk(walk, &e, false);
      return out;
    };

    // Apply one inversion attempt for a single comparison onto `cand`.
    auto tryInvert = [&](const Alt &alt, std::vector<uint8_t> &cand) {
      const SymExpr *a = alt.cmp->a.get(), *b = alt.cmp->b.get();
      const SymExpr *gs = nullptr, *cs = nullptr;
      bool groupLeft = true;
      if (!a->support.empty() && b->support.empty()) { gs = a; cs = b; }
      else if (a->support.empty() && !b->support.empty()) {
        gs = b; cs = a; groupLeft = false;
      } else {
        return false;
      }
      auto chain = matchChain(*gs);
      if (!chain) return false;
      U128 c = evalSym(*cs, {});
      CmpKind kind = alt.cmp->cmp;
      bool neg = alt.negate;
      if (!groupLeft) {
        // c <kind> x  ==  x <kind'> c with adjusted negation
        switch (kind) {
        case CmpKind::Eq: case CmpKind::Ne: break;
        case CmpKind::Ult: kind = CmpKind::Ule; neg = !neg; break;
        case CmpKind::Ule: kind = CmpKind::Ult; neg = !neg; break;
        case CmpKind::Slt: kind = CmpKind::Sle; neg = !neg; break;
        case CmpKind::Sle: kind = CmpKind::Slt; neg = !neg; break;
        }
      }
      for (U128 t : pickTargets(kind, neg, c, gs->width)) {
        res.work += 4;
        auto gval = invertChain(*chain, t, cand);
        if (!gval) continue;
        std::vector<uint8_t> attempt = cand;
        for (uint32_t i = 0; i < chain->group.nbytes; ++i) {
          uint32_t off = chain->group.offset + i;
          if (off < attempt.size())
            attempt[off] = static_cast<uint8_t>(lo64(*gval >> (8 * i)));
        }
        // local check: this comparison must now hold
        res.work += 1;
        bool holds = (evalSym(*alt.cmp, attempt) & 1) != 0;
        if (holds != alt.negate) {
          cand = std::move(attempt);
          return true;
        }
      }
      return false;
    };

    std::vector<uint8_t> cand = base;
    bool allInverted = true;
    for (const SymExpr *u : unsat) {
      bool done = false;
      for (auto &alt : alternatives(*u)) {
        std::vector<uint8_t> scratch = cand;
        if (tryInvert(alt, scratch)) {
          cand = std::move(scratch);
          done = true;
          break;
        }
      }
      if (!done) { allInverted = false; break; }
    }
    if (allInverted && evalAll(cand)) {
      res.status = SolveStatus::Sat;
      res.witness = std::move(cand);
      return res;
    }
  }

  // (b) interval + known-bits unsatisfiability.
  {
    RefineStore store;
    for (int pass = 0; pass < 2; ++pass)
      for (auto &c : constraints) {
        auto norm = normalizeCmp(*c);
        if (norm) refineFromCmp(*norm->cmp, norm->negate, store);
        res.work += 1;
      }
    for (auto &[k, iv] : store)
      if (iv.empty()) {
        res.status = SolveStatus::Unsat;
        return res;
      }
    for (auto &c : constraints) {
      AbsVal v = evalAbs(*c, store);
      res.work += 2;
      if (!v.iv.empty() && v.iv.umax() == 0) {
        res.status = SolveStatus::Unsat;
        return res;
      }
    }
  }

  // (c) exhaustive enumeration when the joint support is small.
  std::vector<uint16_t> fullSupport;
  for (auto &c : constraints)
    fullSupport.insert(fullSupport.end(), c->support.begin(), c->support.end());
  std::sort(fullSupport.begin(), fullSupport.end());
  fullSupport.erase(std::unique(fullSupport.begin(), fullSupport.end()),
                    fullSupport.end());

  auto enumerate = [&](const std::vector<uint16_t> &offs,
                       bool decisive) -> std::optional<SolveResult> {
    if (offs.size() >= 8) return std::nullopt;
    std::vector<uint8_t> cand = base;
    uint64_t total = 1ull << (8 * offs.size());
    for (uint64_t v = 0; v < total; ++v) {
      for (size_t i = 0; i < offs.size(); ++i)
        cand[offs[i]] = static_cast<uint8_t>(v >> (8 * i));
      if (evalAll(cand)) {
        SolveResult r = res;
        r.status = SolveStatus::Sat;
        r.witness = cand;
        return r;
      }
    }
    if (decisive) {
      SolveResult r = res;
      r.status = SolveStatus::Unsat;
      return r;
    }
    return std::nullopt;
  };

  if (!fullSupport.empty() &&
      fullSupport.size() <= static_cast<size_t>(cfg.exhaustiveByteCap)) {
    auto r = enumerate(fullSupport, true);
    if (r) { r->work = res.work; return *r; }
  } else if (!unsatSupport.empty() &&
             unsatSupport.size() <= static_cast<size_t>(cfg.exhaustiveByteCap)) {
    if (auto r = enumerate(unsatSupport, false)) {
      r->work = res.work;
      return *r;
    }
  }

  // (d) randomized local search over the unsatisfied constraints' support.
  if (!unsatSupport.empty()) {
    std::vector<uint8_t> cur = base;
    auto score = [&](const std::vector<uint8_t> &bytes) {
      int sat = 0;
      res.work += constraints.size();
      for (auto &c : constraints) sat += truthy(c, bytes);
      return sat;
    };
    int best = score(cur);
    int target = static_cast<int>(constraints.size());
    for (int trial = 0; trial < cfg.searchBudget && best < target; ++trial) {
      std::vector<uint8_t> cand = cur;
      int touches = 1 + static_cast<int>(rng.below(2));
      for (int k = 0; k < touches; ++k) {
        uint16_t off = unsatSupport[rng.below(unsatSupport.size())];
        switch (rng.below(4)) {
        case 0: cand[off] = static_cast<uint8_t>(rng.below(256)); break;
        case 1: cand[off] += static_cast<uint8_t>(rng.between(1, 16)); break;
        case 2: cand[off] -= static_cast<uint8_t>(rng.between(1, 16)); break;
        case 3: cand[off] ^= static_cast<uint8_t>(1u << rng.below(8)); break;
        }
      }
      int sc = score(cand);
      if (sc >= best) {
        best = sc;
        cur = std::move(cand);
      } else if (rng.chance(0.02)) {
        cur = base; // restart
        best = score(cur);
      }
    }
    if (best == target && evalAll(cur)) {
      res.status = SolveStatus::Sat;
      res.witness = std::move(cur);
      return res;
    }
  }

  res.status = SolveStatus::Unknown;
  return res;
}

} // namespace hfl
