#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hfl/common.hpp"

namespace hfl {

// The miniature IR. Programs are parsed from a line-oriented text format
// (see docs in README / parseProgram) and validated into an immutable,
// slot-resolved form the interpreters execute directly.

enum class Op : uint8_t {
  Const,
  In,       // width 8/16/32, little-endian read at constant offset
  Add, Sub, Mul, Div, Rem,
  Shl, Lshr, Ashr,
  And, Or, Xor,
  Zext, Sext, Trunc,
  Cmp,
  ArrAlloc, ArrLoad, ArrStore,
  Call, Icall,
};

enum class CmpKind : uint8_t { Eq, Ne, Slt, Sle, Ult, Ule };

bool isBinArith(Op op);   // add/sub/mul/div/rem
bool isShift(Op op);      // shl/lshr/ashr
bool isBitwise(Op op);    // and/or/xor
const char *opName(Op op);
const char *cmpName(CmpKind k);

struct Operand {
  bool isImm = false;
  uint64_t imm = 0;
  std::string reg;       // register name when !isImm
  int32_t slot = -1;     // resolved register slot (validation)

  static Operand immediate(uint64_t v) {
    Operand o; o.isImm = true; o.imm = v; return o;
  }
  static Operand ofReg(std::string name) {
    Operand o; o.reg = std::move(name); return o;
  }
};

struct Instr {
  std::string dest;              // empty when the op produces no value
  Op op = Op::Const;
  bool isSigned = false;         // arith ops and const parsing
  Width width = 0;               // result / operation width
  CmpKind cmp = CmpKind::Eq;
  std::vector<Operand> args;
  std::string callee;            // direct calls
  uint64_t aux = 0;              // const value | input offset | array size
  int line = 0;

  int32_t destSlot = -1;         // resolved by validation
  int calleeIdx = -1;
};

struct Terminator {
  enum class Kind : uint8_t { Jmp, Br, Ret } kind = Kind::Ret;
  Operand cond;                  // Br (register, width 1)
  std::string target0, target1;  // Jmp: target0; Br: then/else
  std::optional<Operand> retVal;
  int line = 0;

  int thenIdx = -1, elseIdx = -1; // resolved block indices
};

struct BasicBlock {
  std::string label;
  std::vector<Instr> instrs;
  Terminator term;
  int line = 0;
};

struct Param {
  std::string name;
  Width width = 32;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::string entryBlock;
  std::vector<BasicBlock> blocks;
  int line = 0;

  // Filled by validation.
  int entryIdx = -1;
  Width retWidth = 0;            // 0 = void
  int numSlots = 0;              // register slot count
  std::map<std::string, int> blockIndex;
  std::map<std::string, int32_t> regSlot;
  std::vector<Width> slotWidth;       // 0 for array slots
  std::vector<int> slotArraySize;     // >0 marks an array register
  std::vector<Width> slotElemWidth;
  std::vector<std::string> slotName;

  int blockIdx(const std::string &label) const;
};

// Dense identity of a (function, block) pair, program-wide.
using NodeId = uint32_t;
// Exact edge identity: (src node, dst node) packed. No hashing scheme, so
// two distinct edges can never collide.
using EdgeKey = uint64_t;

inline EdgeKey packEdge(NodeId a, NodeId b) {
  return (static_cast<uint64_t>(a) << 32) | b;
}
inline NodeId edgeSrc(EdgeKey e) { return static_cast<NodeId>(e >> 32); }
inline NodeId edgeDst(EdgeKey e) { return static_cast<NodeId>(e); }

struct Program {
  std::vector<Function> functions;
  std::string entry;
  std::vector<std::string> funcTable;
  uint32_t inputLen = 64;

  // Filled by validation.
  int entryIdx = -1;
  std::map<std::string, int> funcIndex;
  std::vector<int> funcTableIdx;
  std::vector<NodeId> nodeBase;  // per function, id of block 0
  uint32_t numNodes = 0;

  int funcIdx(const std::string &name) const;
  NodeId node(int fn, int block) const { return nodeBase[fn] + block; }
  std::pair<int, int> nodeLoc(NodeId n) const; // (function, block)
  std::string nodeName(NodeId n) const;        // "fn:block"
};

// Parse IR text and validate it. Throws ParseError / ValidationError.
Program parseProgram(const std::string &text);

// Static validation + slot resolution; parseProgram calls this, but
// programmatically built Programs (tests, benchgen) use it directly.
void validateProgram(Program &p);

// Render a Program back to its textual form. printProgram(parseProgram(t))
// is a fixpoint for canonical text.
std::string printProgram(const Program &p);

} // namespace hfl
