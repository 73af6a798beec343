#pragma once

#include <span>
#include <vector>

#include "hfl/intervals.hpp"
#include "hfl/rng.hpp"
#include "hfl/symexpr.hpp"

namespace hfl {

enum class SolveStatus : uint8_t { Sat, Unsat, Unknown };
const char *solveStatusName(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Unknown;
  std::vector<uint8_t> witness;    // full input bytes when Sat
  std::vector<uint16_t> support;   // offsets of the constraints actually solved
  uint64_t work = 0;               // budget units consumed
};

struct SolverConfig {
  int exhaustiveByteCap = 2;  // exhaustive search up to 2^(8*cap) assignments
  int searchBudget = 4000;    // randomized trials
};

// Decide a conjunction of width-1 constraints, starting from a hint
// assignment (the seed bytes). Layered: exact inversion of invertible
// chains over one contiguous byte group, interval/known-bits reasoning for
// unsatisfiability, exhaustive enumeration over small supports, then
// randomized search. Sat results are always concretely re-validated and
// differ from the hint only inside the unsatisfied constraints' support.
SolveResult solve(std::span<const SymRef> constraints,
                  std::span<const uint8_t> hint, uint32_t inputLen,
                  const SolverConfig &cfg, Rng &rng);

} // namespace hfl
