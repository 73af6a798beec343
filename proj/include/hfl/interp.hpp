#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "hfl/labels.hpp"
#include "hfl/ir.hpp"

namespace hfl {

struct RunLimits {
  uint64_t instrBudget = 1'000'000;
  int callDepth = 64;
  bool recordEdges = true; // off for bulk enumeration runs
};

enum class StopReason : uint8_t { Returned, BudgetExhausted, CallDepthExceeded };

struct Violation {
  LabelId label;
  std::vector<uint64_t> operands;
};

// Everything a single concrete run produces. Deterministic in
// (program, labels, input, limits); see runConcrete.
struct ExecTrace {
  std::vector<NodeId> blockSeq;
  std::unordered_map<EdgeKey, uint32_t> edgeHits;
  std::vector<LabelId> labelsReached;            // sorted, unique
  std::vector<Violation> violations;             // first occurrence per label
  // Distinct (branch block, taken direction) pairs; 0 = then, 1 = else.
  std::vector<std::pair<NodeId, uint8_t>> branchesTaken;
  uint64_t retCode = 0;
  uint64_t instrCount = 0;
  StopReason stop = StopReason::Returned;
  uint32_t icallOutOfTable = 0;

  bool reachedLabel(LabelId id) const;
  bool violatedLabel(LabelId id) const;
};

// Execute the program on the given input (zero-extended to inputLen).
// Execution never aborts on a violation: arithmetic wraps, out-of-bounds
// loads yield 0, out-of-bounds stores are dropped, oversized shift amounts
// are masked to width-1 bits, and division by zero yields 0.
ExecTrace runConcrete(const Program &p, const LabelSet &labels,
                      std::span<const uint8_t> input,
                      const RunLimits &limits = {});

} // namespace hfl
