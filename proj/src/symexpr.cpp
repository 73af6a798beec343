#include "hfl/symexpr.hpp"

#include <algorithm>
#include <sstream>

namespace hfl {

namespace {

std::vector<uint16_t> mergeSupport(const SymRef &a, const SymRef &b) {
  std::vector<uint16_t> out;
  if (a) out = a->support;
  if (b) {
    out.insert(out.end(), b->support.begin(), b->support.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

SymRef make(SymExpr e) { return std::make_shared<SymExpr>(std::move(e)); }

bool isConst(const SymRef &e) { return e->kind == SymExpr::K::Const; }

} // namespace

SymRef sInput(uint32_t offset) {
  SymExpr e;
  e.kind = SymExpr::K::InputByte;
  e.width = 8;
  e.offset = offset;
  e.support = {static_cast<uint16_t>(offset)};
  return make(std::move(e));
}

SymRef sConst(Width w, U128 v) {
  SymExpr e;
  e.kind = SymExpr::K::Const;
  e.width = w;
  e.cval = truncTo(v, w);
  return make(std::move(e));
}

SymRef sBin(Op op, bool isSigned, Width w, SymRef a, SymRef b) {
  SymExpr e;
  e.kind = SymExpr::K::Bin;
  e.op = op;
  e.isSigned = isSigned;
  e.width = w;
  e.a = std::move(a);
  e.b = std::move(b);
  e.support = mergeSupport(e.a, e.b);
  if (isConst(e.a) && isConst(e.b)) return sConst(w, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sShift(Op op, Width w, SymRef a, SymRef b) {
  SymExpr e;
  e.kind = SymExpr::K::Shift;
  e.op = op;
  e.width = w;
  e.a = std::move(a);
  e.b = std::move(b);
  e.support = mergeSupport(e.a, e.b);
  if (isConst(e.a) && isConst(e.b)) return sConst(w, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sBit(Op op, Width w, SymRef a, SymRef b) {
  SymExpr e;
  e.kind = SymExpr::K::Bit;
  e.op = op;
  e.width = w;
  e.a = std::move(a);
  e.b = std::move(b);
  e.support = mergeSupport(e.a, e.b);
  if (isConst(e.a) && isConst(e.b)) return sConst(w, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sCmp(CmpKind k, SymRef a, SymRef b) {
  SymExpr e;
  e.kind = SymExpr::K::Cmp;
  e.cmp = k;
  e.width = 1;
  e.a = std::move(a);
  e.b = std::move(b);
  e.support = mergeSupport(e.a, e.b);
  if (isConst(e.a) && isConst(e.b)) return sConst(1, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sExt(Op extOp, Width to, SymRef a) {
  if (a->width == to) return a;
  SymExpr e;
  e.kind = SymExpr::K::Ext;
  e.op = extOp;
  e.width = to;
  e.a = std::move(a);
  e.support = e.a->support;
  if (isConst(e.a)) return sConst(to, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sTrunc(Width to, SymRef a) {
  if (a->width == to) return a;
  SymExpr e;
  e.kind = SymExpr::K::Trunc;
  e.width = to;
  e.a = std::move(a);
  e.support = e.a->support;
  if (isConst(e.a)) return sConst(to, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sConcatLE(std::vector<SymRef> bytes) {
  if (bytes.size() == 1) return bytes[0];
  SymExpr e;
  e.kind = SymExpr::K::Concat;
  e.width = static_cast<Width>(8 * bytes.size());
  e.parts = std::move(bytes);
  bool allConst = true;
  for (auto &b : e.parts) {
    e.support.insert(e.support.end(), b->support.begin(), b->support.end());
    allConst &= isConst(b);
  }
  std::sort(e.support.begin(), e.support.end());
  e.support.erase(std::unique(e.support.begin(), e.support.end()),
                  e.support.end());
  if (allConst) return sConst(e.width, evalSym(e, {}));
  return make(std::move(e));
}

SymRef sNot(SymRef boolean) {
  return sBit(Op::Xor, 1, std::move(boolean), sConst(1, 1));
}

U128 evalSym(const SymExpr &e, std::span<const uint8_t> input) {
  switch (e.kind) {
  case SymExpr::K::InputByte:
    return e.offset < input.size() ? input[e.offset] : 0;
  case SymExpr::K::Const:
    return e.cval;
  case SymExpr::K::Bin: {
    U128 x = evalSym(*e.a, input), y = evalSym(*e.b, input);
    Width w = e.width;
    switch (e.op) {
    case Op::Add: return truncTo(x + y, w);
    case Op::Sub: return truncTo(x - y, w);
    case Op::Mul: return truncTo(x * y, w);
    case Op::Div: {
      if (y == 0) return 0;
      if (!e.isSigned) return x / y;
      I128 xs = signExtend(x, w), ys = signExtend(y, w);
      I128 minv = w >= 128 ? (I128{1} << 126) * -2 : -(I128{1} << (w - 1));
      if (xs == minv && ys == -1) return truncTo(static_cast<U128>(minv), w);
      return truncTo(static_cast<U128>(xs / ys), w);
    }
    case Op::Rem: {
      if (y == 0) return 0;
      if (!e.isSigned) return x % y;
      I128 xs = signExtend(x, w), ys = signExtend(y, w);
      I128 minv = w >= 128 ? (I128{1} << 126) * -2 : -(I128{1} << (w - 1));
      if (xs == minv && ys == -1) return 0;
      return truncTo(static_cast<U128>(xs % ys), w);
    }
    default: return 0;
    }
  }
  case SymExpr::K::Shift: {
    U128 x = evalSym(*e.a, input), y = evalSym(*e.b, input);
    unsigned amt = static_cast<unsigned>(y) & (e.width - 1);
    switch (e.op) {
    case Op::Shl: return truncTo(x << amt, e.width);
    case Op::Lshr: return truncTo(x, e.width) >> amt;
    case Op::Ashr: {
      I128 xs = signExtend(x, e.width);
      return truncTo(static_cast<U128>(xs >> amt), e.width);
    }
    default: return 0;
    }
  }
  case SymExpr::K::Bit: {
    U128 x = evalSym(*e.a, input), y = evalSym(*e.b, input);
    switch (e.op) {
    case Op::And: return truncTo(x & y, e.width);
    case Op::Or: return truncTo(x | y, e.width);
    case Op::Xor: return truncTo(x ^ y, e.width);
    default: return 0;
    }
  }
  case SymExpr::K::Cmp: {
    U128 x = evalSym(*e.a, input), y = evalSym(*e.b, input);
    Width w = e.a->width;
    switch (e.cmp) {
    case CmpKind::Eq: return x == y;
    case CmpKind::Ne: return x != y;
    case CmpKind::Ult: return x < y;
    case CmpKind::Ule: return x <= y;
    case CmpKind::Slt: return signExtend(x, w) < signExtend(y, w);
    case CmpKind::Sle: return signExtend(x, w) <= signExtend(y, w);
    }
    return 0;
  }
  case SymExpr::K::Ext: {
    U128 x = evalSym(*e.a, input);
    if (e.op == Op::Zext) return x;
    return truncTo(static_cast<U128>(signExtend(x, e.a->width)), e.width);
  }
  case SymExpr::K::Trunc:
    return truncTo(evalSym(*e.a, input), e.width);
  case SymExpr::K::Concat: {
    U128 v = 0;
    for (size_t i = 0; i < e.parts.size(); ++i)
      v |= truncTo(evalSym(*e.parts[i], input), 8) << (8 * i);
    return v;
  }
  }
  return 0;
}

std::string symToString(const SymExpr &e) {
  std::ostringstream os;
  switch (e.kind) {
  case SymExpr::K::InputByte:
    os << "in[" << e.offset << "]";
    break;
  case SymExpr::K::Const:
    os << "0x" << std::hex << static_cast<uint64_t>(e.cval);
    if (e.cval >> 64) os << "..";
    break;
  case SymExpr::K::Bin:
    os << "(" << opName(e.op) << (e.isSigned ? ".s" : ".u") << int(e.width)
       << " " << symToString(*e.a) << " " << symToString(*e.b) << ")";
    break;
  case SymExpr::K::Shift:
  case SymExpr::K::Bit:
    os << "(" << opName(e.op) << "." << int(e.width) << " "
       << symToString(*e.a) << " " << symToString(*e.b) << ")";
    break;
  case SymExpr::K::Cmp:
    os << "(" << cmpName(e.cmp) << " " << symToString(*e.a) << " "
       << symToString(*e.b) << ")";
    break;
  case SymExpr::K::Ext:
    os << "(" << opName(e.op) << "." << int(e.width) << " "
       << symToString(*e.a) << ")";
    break;
  case SymExpr::K::Trunc:
    os << "(trunc." << int(e.width) << " " << symToString(*e.a) << ")";
    break;
  case SymExpr::K::Concat:
    os << "(le";
    for (auto &p : e.parts) os << " " << symToString(*p);
    os << ")";
    break;
  }
  return os.str();
}

} // namespace hfl
