#pragma once

#include <cstdint>
#include <vector>

#include "hfl/coverage.hpp"
#include "hfl/interp.hpp"
#include "hfl/rng.hpp"

namespace hfl {

enum class SeedOrigin : uint8_t { Initial, Fuzzer, Concolic };
const char *originName(SeedOrigin o);

// One conditional the seed executed: where it went and what the untaken
// arm would have been.
struct BranchObs {
  NodeId site;
  uint8_t dir; // 0 = then, 1 = else (direction taken)
  NodeId takenDst;
  NodeId oppDst;
  bool operator==(const BranchObs &) const = default;
};

struct Seed {
  int id = 0;
  std::vector<uint8_t> bytes;
  int parentId = -1;
  SeedOrigin origin = SeedOrigin::Initial;
  bool plusCov = false;
  bool concolicTested = false;
  uint64_t pathDigest = 0;
  std::vector<BranchObs> branches; // distinct (site, dir)
  std::vector<LabelId> labelsReached;
  int meaningfulLen = 0; // bytes up to the last non-zero one
  // Concolic provenance: "flip <site> -> <dir>" or "<mode> label <id>".
  std::string provenance;
};

// Derive seed metadata from a trace of its execution.
void attachTraceInfo(const Program &p, const ExecTrace &t, Seed &s);

// Branches on the seed's path whose opposite arm's first edge has no
// coverage at all; recomputed against the current map every time.
std::vector<BranchObs> uncoveredBranches(const Seed &s, const CoverageMap &cov);

enum class MutKind : uint8_t {
  BitFlip, ByteFlip, Arith, Interesting, BlockCopyWithin, BlockDonor,
};
constexpr int kMutKinds = 6;

// Apply one mutation operator in place; donor supplies block material.
MutKind applyMutation(std::vector<uint8_t> &bytes,
                      const std::vector<uint8_t> &donor, Rng &rng);

struct FuzzStats {
  uint64_t execs = 0;
  int retained = 0;
};

struct ViolationRecord {
  LabelId label;
  std::vector<uint8_t> input;
};

struct FuzzRoundResult {
  FuzzStats stats;
  std::vector<int> newSeedIds;
  std::vector<ViolationRecord> violations; // first witness per label, this round
  std::vector<LabelId> labelsReached;      // union over executed candidates
};

struct FuzzContext {
  const Program &p;
  const LabelSet &labels;
  RunLimits lim;
  CoverageMap &cov;
  std::vector<Seed> &queue;
  int &nextSeedId;
  size_t &cursor;      // round-robin position
  int candidatesPerSeed = 32;
};

// One mutation round: cycles the queue, giving +cov seeds a 4x candidate
// budget, retains candidates that add a new (edge,bucket) pair, and
// reports every violation observed (with its witness input).
FuzzRoundResult fuzzRound(FuzzContext &ctx, Rng &rng, uint64_t execBudget);

} // namespace hfl
