#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "hfl/concolic.hpp"
#include "hfl/icfg.hpp"
#include "hfl/seedstore.hpp"

namespace hfl {

// Global per-branch solving-attempt counts. Keys are (site, direction of
// the untaken arm that was attempted); counts only ever grow, bumped once
// per concolic run for every attempted branch left uncovered afterwards.
class AttemptLedger {
public:
  uint32_t get(NodeId site, uint8_t dir) const {
    auto it = counts.find({site, dir});
    return it == counts.end() ? 0 : it->second;
  }
  void bump(NodeId site, uint8_t dir) { ++counts[{site, dir}]; }
  size_t size() const { return counts.size(); }

private:
  std::map<std::pair<NodeId, uint8_t>, uint32_t> counts;
};

struct ScoreTerm {
  NodeId site;
  uint8_t dir;    // untaken direction
  NodeId target;  // first block of that arm
  int potential;  // labels reachable from the arm, including its own
  uint32_t attempts;
  double weight;  // e^(-decay*attempts) * potential
};

struct SeedScore {
  int seedId = 0;
  int n = 0; // uncovered branches on the path
  std::vector<ScoreTerm> terms;
  double score = 0;
};

// The closed-form importance score: mean of e^(-decay*S_i) * L_i.
double scoreFromTerms(std::span<const std::pair<int, uint32_t>> terms,
                      double decay = 0.05);

SeedScore scoreSeed(const Seed &seed, const ReachTable &reach,
                    const AttemptLedger &ledger, const CoverageMap &cov,
                    double decay = 0.05);

enum class Policy : uint8_t { Savior, Random, SmallestFirst };
const char *policyName(Policy p);
std::optional<Policy> policyFromName(const std::string &name);

// Pick up to k queue indices for concolic execution. The bug-driven policy
// ranks by score with +cov then lower-id tie-breaks; random draws
// uniformly; smallest-first ranks by meaningful byte count.
std::vector<size_t> selectForConcolic(const std::vector<Seed> &queue,
                                      const std::vector<SeedScore> &scores,
                                      int k, Policy policy, Rng &rng);

// Timeout proportional to the uncovered branches on the seed's path.
uint64_t concolicTimeout(const Seed &seed, const CoverageMap &cov, uint64_t tau);

struct CampaignConfig {
  Policy policy = Policy::Savior;
  bool concolicEnabled = true;
  uint64_t fuzzExecsPerRound = 2000;
  int concolicSeedsPerRound = 1; // K
  uint64_t tau = 10000;
  uint64_t rngSeed = 1;
  int rounds = 20;
  bool stopOnAllPlanted = false;
  std::vector<LabelId> plantedIds;
  std::vector<std::vector<uint8_t>> initialSeeds; // default: one all-zero
  double decay = 0.05;
  int workers = 1;
  bool deterministic = true;
  int candidatesPerSeed = 32;
  RunLimits limits;
  SolverConfig solver;
};

struct RoundStats {
  int round = 0;
  uint64_t edges = 0;
  uint64_t pairs = 0;
  int labelsReached = 0;
  int labelsTriggered = 0;
  int plantedTriggered = 0;
  std::string policy;
  std::vector<int> scheduled; // seed ids sent to the concolic executor

  std::string toJsonLine() const; // exactly the documented keys
};

struct BugRecord {
  LabelId label = 0;
  Family family = Family::OOB;
  int firstRound = 0;
  std::vector<uint8_t> witness;
  std::string witnessFile = "-";
};

struct CampaignResult {
  std::vector<RoundStats> rounds;
  std::vector<BugRecord> bugs; // by label id
  uint64_t totalExecs = 0;
  std::string bugReportCsv() const; // label_id,family,first_round,witness_file
};

// Drives rounds of fuzzing, re-scoring, concolic scheduling and triage.
class Campaign {
public:
  Campaign(const Program &p, const LabelSet &labels, const ReachTable &reach,
           CampaignConfig cfg);

  CampaignResult run(const std::function<void(const RoundStats &)> &onRound = {},
                     const SeedStore *store = nullptr);

  const std::vector<Seed> &queue() const { return queue_; }
  const AttemptLedger &ledger() const { return ledger_; }

private:
  const Program &prog;
  const LabelSet &labels;
  const ReachTable &reach;
  CampaignConfig cfg;

  std::vector<Seed> queue_;
  CoverageMap cov;
  AttemptLedger ledger_;
  std::set<LabelId> reachedGlobal;
  std::map<LabelId, BugRecord> triggered;
  int nextSeedId = 1;
  size_t cursor = 0;

  void insertInitialSeeds(Rng &rng);
  void noteViolation(LabelId id, const std::vector<uint8_t> &witness, int round);
  bool allPlantedTriggered() const;
  void triage(const ConcolicResult &res, int round);
  FuzzRoundResult fuzzPhase(Rng &rng);
};

} // namespace hfl
