#pragma once

#include <set>

#include "hfl/coverage.hpp"
#include "hfl/fuzz.hpp"
#include "hfl/solver.hpp"

namespace hfl {

// One branch or concretization constraint on the path.
struct PathEntry {
  SymRef constraint;
  enum class Kind : uint8_t { Branch, Concretize } kind;
  NodeId site = 0;
  uint8_t dirTaken = 0;
};

struct TestCaseOut {
  enum class Kind : uint8_t { BranchFlip, VerifyWitness, OptimisticWitness };
  Kind kind;
  std::vector<uint8_t> bytes;
  int sourceSeedId = -1;
  NodeId site = 0;      // flips: the branch site
  uint8_t newDir = 0;   // flips: direction the test case should take
  LabelId label = 0;    // witnesses
};

struct VerificationOutcome {
  LabelId labelId = 0;
  enum class Mode : uint8_t { Full, Optimistic } mode = Mode::Full;
  SolveStatus status = SolveStatus::Unknown;
  std::vector<uint16_t> support;
};

struct AttemptedBranch {
  NodeId site;
  uint8_t dir;       // untaken direction that was attempted
  NodeId target;     // first block of that arm
};

struct ConcolicResult {
  std::vector<TestCaseOut> testCases;
  std::vector<VerificationOutcome> verifications;
  std::vector<AttemptedBranch> attempted;
  std::vector<NodeId> blockSeq;    // concrete path actually followed
  std::vector<PathEntry> path;     // collected path condition
  bool budgetExhausted = false;
  uint64_t unitsUsed = 0;
};

// Symbolic interpreter that replays one seed along its concrete path,
// collecting the path condition over input bytes. Array and indirect-call
// indices are concretized to the seed's values and pinned with equality
// constraints, which keeps every emitted test case on the intended path
// prefix. One instance is single-threaded; reset() clears per-seed state
// so the instance can replay seeds back to back without re-setup.
class ConcolicEngine {
public:
  ConcolicEngine(const Program &p, const LabelSet &labels,
                 SolverConfig solverCfg = {});

  // Budget is in symbolic instructions; solver work draws from the same
  // pool. Verification queries are served before branch flips.
  ConcolicResult run(const Seed &seed, const CoverageMap &covSnapshot,
                     const std::set<LabelId> &alreadyTriggered,
                     uint64_t timeoutUnits, Rng &rng);

  void reset();
  size_t retainedStateSize() const;

private:
  const Program &prog;
  const LabelSet &labels;
  SolverConfig cfg;

  // Per-seed state, cleared by reset().
  std::vector<PathEntry> path;
  struct VerifyQuery {
    size_t pcLen;
    SymRef cond;
    LabelId label;
  };
  struct FlipQuery {
    size_t pcLen;
    SymRef negated;
    NodeId site;
    uint8_t newDir;
    NodeId target;
  };
  std::vector<VerifyQuery> verifyQueries;
  std::vector<FlipQuery> flipQueries;

  void interpret(const Seed &seed, const CoverageMap &cov,
                 const std::set<LabelId> &alreadyTriggered,
                 uint64_t timeoutUnits, ConcolicResult &out);
};

} // namespace hfl
