#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hfl/common.hpp"
#include "hfl/ir.hpp"

namespace hfl {

// Byte-level symbolic expressions over the program input. Leaves are
// single input bytes and constants; multi-byte reads become little-endian
// concatenations. Widths run up to 128 bits so overflow conditions can be
// stated exactly at doubled width.
struct SymExpr;
using SymRef = std::shared_ptr<const SymExpr>;

struct SymExpr {
  enum class K : uint8_t {
    InputByte, Const, Bin, Shift, Bit, Cmp, Ext, Trunc, Concat,
  };
  K kind;
  Width width;
  Op op = Op::Add;          // Bin/Shift/Bit/Ext discriminator
  bool isSigned = false;    // Bin
  CmpKind cmp = CmpKind::Eq;
  uint32_t offset = 0;      // InputByte
  U128 cval = 0;            // Const
  SymRef a, b;
  std::vector<SymRef> parts;      // Concat, parts[0] = least significant byte
  std::vector<uint16_t> support;  // sorted, unique input offsets
};

SymRef sInput(uint32_t offset);
SymRef sConst(Width w, U128 v);
SymRef sBin(Op op, bool isSigned, Width w, SymRef a, SymRef b);
SymRef sShift(Op op, Width w, SymRef a, SymRef b);
SymRef sBit(Op op, Width w, SymRef a, SymRef b);
SymRef sCmp(CmpKind k, SymRef a, SymRef b);
SymRef sExt(Op extOp, Width to, SymRef a);
SymRef sTrunc(Width to, SymRef a);
SymRef sConcatLE(std::vector<SymRef> bytes);
SymRef sNot(SymRef boolean); // width-1 negation

// Evaluate under concrete input bytes (missing bytes read as 0). The
// semantics mirror the interpreter exactly: division by zero yields 0,
// INT_MIN/-1 wraps, INT_MIN%-1 is 0 and shift amounts are masked.
U128 evalSym(const SymExpr &e, std::span<const uint8_t> input);

inline bool dependsOnInput(const SymExpr &e) { return !e.support.empty(); }

std::string symToString(const SymExpr &e);

} // namespace hfl
