#pragma once

#include <string>
#include <vector>

#include "hfl/labels.hpp"
#include "hfl/rng.hpp"

namespace hfl {

// One planted, ground-truth bug. The guard is a 32-bit magic compare at a
// fixed input offset (or a chained per-byte compare); the labeled site
// behind it either fires whenever reached (constant operands) or needs an
// additional trigger pattern in the input, in which case reaching the
// site leaves the label untriggered until the trigger bytes are solved.
struct PlantSpec {
  Family family = Family::UnsignedOverflow;
  bool inputTriggered = true;
  bool wordGuard = true; // false: four chained single-byte compares
};

struct BenchSpec {
  uint64_t rngSeed = 1;
  uint32_t inputLen = 64;
  int fillerFunctions = 2;
  int blocksPerFunction = 4;
  int branchDepth = 6;
  double indirectCallFraction = 0.0;
  int denseLabels = 18;
  int densitySkew = 10;
  std::vector<PlantSpec> plants; // plants[0] lives in the dense region
};

struct PlantedBugInfo {
  int bugIndex = 0;
  LabelId labelId = 0;
  Family family = Family::UnsignedOverflow;
  uint32_t guardOffset = 0;
  uint32_t magic = 0;
  bool wordGuard = true;
  bool inputTriggered = true;
  uint32_t triggerOffset = 0;
  std::vector<uint8_t> groundTruthInput;
  // Ground truth with the trigger bytes zeroed: reaches the site without
  // firing it (equals groundTruthInput for reach-triggered plants).
  std::vector<uint8_t> reachInput;
};

struct GeneratedBench {
  std::string irText;
  Program program;
  LabelSet labels; // placed, untrimmed
  std::vector<PlantedBugInfo> plants;
  NodeId denseArmTarget = 0;  // then-arm of the dense guard
  NodeId sparseArmTarget = 0; // then-arm of the sparse guard
  std::string manifestCsv() const; // bug_id,offset,magic_hex,input_hex
  std::vector<LabelId> plantedLabelIds() const;
};

// Deterministic generator for the two-handler benchmark family: a
// label-dense handler behind one magic guard, a label-sparse handler
// behind another, and a byte-compare filler region that mutation finds
// easily. Every plant is certified by replaying its ground-truth input at
// generation time. Throws Error for infeasible shapes.
GeneratedBench generate(const BenchSpec &spec);

// A program with one live label that conflicts with a constant dominating
// guard: certified untriggerable (exhaustively when inputLen <= 2). With
// survivesTrim the conflict is obscured behind a bitwise mask so the
// static trimmer keeps the label and only the solver can refute it.
GeneratedBench plantInfeasible(const BenchSpec &spec, bool survivesTrim = true);

} // namespace hfl
