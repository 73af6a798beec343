#pragma once

#include <string>
#include <vector>

#include "hfl/intervals.hpp"
#include "hfl/ir.hpp"

namespace hfl {

enum class Family : uint8_t { OOB, OversizedShift, SignedOverflow, UnsignedOverflow };
const char *familyName(Family f);

using LabelId = int32_t;

// A potential-bug annotation on one instruction. The trigger condition is
// implied by the family and the host instruction's operands:
//   OOB            : idx < 0  or  idx >= size(array)
//   OversizedShift : amt < 0  or  amt >= width
//   SignedOverflow : exact result outside [-2^(n-1), 2^(n-1)-1]
//   UnsignedOverflow: exact result > 2^n - 1
struct BugLabel {
  LabelId id = 0;        // 1-based, program order
  Family family = Family::OOB;
  int fn = 0, block = 0, instr = 0;
  bool live = true;
};

class LabelSet {
public:
  std::vector<BugLabel> labels;
  // instrLabel[fn][block][instrIdx] = label index (into labels) or -1.
  std::vector<std::vector<std::vector<int32_t>>> instrLabel;

  void buildIndex(const Program &p);
  const BugLabel *at(int fn, int block, int instr) const {
    int32_t i = instrLabel[fn][block][instr];
    return i < 0 ? nullptr : &labels[i];
  }
  int liveCount() const;
  std::vector<LabelId> liveIdsIn(const Program &p, int fn, int block) const;
};

// Attach one live label to every eligible instruction, ids in program order
// starting at 1.
LabelSet placeLabels(const Program &p);

// Concrete trigger conditions, one per family. Index and shift amounts are
// interpreted as signed values of their operand width; overflow checks use
// the exact integer result.
bool oobViolation(uint64_t idx, Width idxWidth, int size);
bool shiftViolation(uint64_t amt, Width amtWidth, Width n);
bool signedOverflowViolation(Op op, uint64_t x, uint64_t y, Width n);
bool unsignedOverflowViolation(Op op, uint64_t x, uint64_t y, Width n);

// Immediate dominators of the intra-function CFG; idom[entry] = entry,
// -1 for blocks unreachable from the entry.
std::vector<int> computeDominators(const Function &f);

struct TrimEvidence {
  LabelId id;
  std::string parentBlock;
  std::string guard; // textual description of the conflicting constraint
};

struct TrimReport {
  int total = 0;
  std::vector<TrimEvidence> trimmed;
};

// Static label filter: marks a label trimmed when its block's immediate
// dominator branches on a constant comparison that (1) solely gates the
// label's block, (2) whose decided registers are not redefined on any
// dominator-free path to the label, and (3) constant-conflicts with the
// label condition. Returns the filtered set plus evidence.
std::pair<LabelSet, TrimReport> trimLabels(const Program &p, const LabelSet &ls);

} // namespace hfl
