#include "hfl/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace hfl {

const char *policyName(Policy p) {
  switch (p) {
  case Policy::Savior: return "savior";
  case Policy::Random: return "random";
  case Policy::SmallestFirst: return "smallest";
  }
  return "?";
}

std::optional<Policy> policyFromName(const std::string &name) {
  if (name == "savior") return Policy::Savior;
  if (name == "random") return Policy::Random;
  if (name == "smallest" || name == "smallestFirst") return Policy::SmallestFirst;
  return std::nullopt;
}

double scoreFromTerms(std::span<const std::pair<int, uint32_t>> terms,
                      double decay) {
  if (terms.empty()) return 0.0;
  double sum = 0;
  for (auto &[potential, attempts] : terms)
    sum += std::exp(-decay * double(attempts)) * double(potential);
  return sum / double(terms.size());
}

SeedScore scoreSeed(const Seed &seed, const ReachTable &reach,
                    const AttemptLedger &ledger, const CoverageMap &cov,
                    double decay) {
  SeedScore sc;
  sc.seedId = seed.id;
  auto unc = uncoveredBranches(seed, cov);
  sc.n = static_cast<int>(unc.size());
  if (sc.n == 0) return sc;
  double sum = 0;
  for (auto &b : unc) {
    ScoreTerm term;
    term.site = b.site;
    term.dir = static_cast<uint8_t>(1 - b.dir);
    term.target = b.oppDst;
    term.potential = reach.potential(b.oppDst);
    term.attempts = ledger.get(term.site, term.dir);
    term.weight = std::exp(-decay * double(term.attempts)) * double(term.potential);
    sum += term.weight;
    sc.terms.push_back(term);
  }
  sc.score = sum / double(sc.n);
  return sc;
}

std::vector<size_t> selectForConcolic(const std::vector<Seed> &queue,
                                      const std::vector<SeedScore> &scores,
                                      int k, Policy policy, Rng &rng) {
  std::vector<size_t> eligible;
  for (size_t i = 0; i < queue.size(); ++i)
    if (!queue[i].concolicTested) eligible.push_back(i);
  if (eligible.empty() || k <= 0) return {};

  switch (policy) {
  case Policy::Savior:
    std::sort(eligible.begin(), eligible.end(), [&](size_t a, size_t b) {
      if (scores[a].score != scores[b].score)
        return scores[a].score > scores[b].score;
      if (queue[a].plusCov != queue[b].plusCov) return queue[a].plusCov;
      return queue[a].id < queue[b].id;
    });
    break;
  case Policy::Random:
    for (size_t i = eligible.size(); i > 1; --i)
      std::swap(eligible[i - 1], eligible[rng.below(i)]);
    break;
  case Policy::SmallestFirst:
    std::sort(eligible.begin(), eligible.end(), [&](size_t a, size_t b) {
      if (queue[a].meaningfulLen != queue[b].meaningfulLen)
        return queue[a].meaningfulLen < queue[b].meaningfulLen;
      return queue[a].id < queue[b].id;
    });
    break;
  }
  if (eligible.size() > static_cast<size_t>(k)) eligible.resize(k);
  return eligible;
}

uint64_t concolicTimeout(const Seed &seed, const CoverageMap &cov, uint64_t tau) {
  uint64_t n = uncoveredBranches(seed, cov).size();
  return tau * std::max<uint64_t>(1, n);
}

std::string RoundStats::toJsonLine() const {
  std::ostringstream os;
  os << "{\"round\":" << round << ",\"edges\":" << edges
     << ",\"pairs\":" << pairs << ",\"labels_reached\":" << labelsReached
     << ",\"labels_triggered\":" << labelsTriggered
     << ",\"planted_triggered\":" << plantedTriggered << ",\"policy\":\""
     << policy << "\"}";
  return os.str();
}

std::string CampaignResult::bugReportCsv() const {
  std::ostringstream os;
  os << "label_id,family,first_round,witness_file\n";
  for (auto &b : bugs)
    os << b.label << "," << familyName(b.family) << "," << b.firstRound << ","
       << b.witnessFile << "\n";
  return os.str();
}

Campaign::Campaign(const Program &p, const LabelSet &ls, const ReachTable &rt,
                   CampaignConfig config)
    : prog(p), labels(ls), reach(rt), cfg(std::move(config)) {}

void Campaign::noteViolation(LabelId id, const std::vector<uint8_t> &witness,
                             int round) {
  if (triggered.count(id)) return;
  BugRecord rec;
  rec.label = id;
  rec.family = labels.labels[id - 1].family;
  rec.firstRound = round;
  rec.witness = witness;
  triggered.emplace(id, std::move(rec));
}

bool Campaign::allPlantedTriggered() const {
  if (cfg.plantedIds.empty()) return false;
  for (LabelId id : cfg.plantedIds)
    if (!triggered.count(id)) return false;
  return true;
}

void Campaign::insertInitialSeeds(Rng &rng) {
  (void)rng;
  auto seeds = cfg.initialSeeds;
  if (seeds.empty()) seeds.push_back(std::vector<uint8_t>(prog.inputLen, 0));
  for (auto &bytes : seeds) {
    Seed s;
    s.id = nextSeedId++;
    s.bytes = bytes;
    s.bytes.resize(prog.inputLen, 0);
    s.origin = SeedOrigin::Initial;
    auto t = runConcrete(prog, labels, s.bytes, cfg.limits);
    int fresh = cov.observe(t);
    s.plusCov = fresh > 0;
    attachTraceInfo(prog, t, s);
    for (LabelId id : t.labelsReached) reachedGlobal.insert(id);
    for (auto &v : t.violations) noteViolation(v.label, s.bytes, 0);
    queue_.push_back(std::move(s));
  }
}

FuzzRoundResult Campaign::fuzzPhase(Rng &rng) {
  if (cfg.workers <= 1 || cfg.deterministic) {
    FuzzContext ctx{prog,   labels,     cfg.limits, cov,
                    queue_, nextSeedId, cursor,     cfg.candidatesPerSeed};
    return fuzzRound(ctx, rng, cfg.fuzzExecsPerRound);
  }

  // Concurrent mode: workers mutate against snapshots; the coordinator
  // replays their candidates so stale retentions are pruned.
  int n = cfg.workers;
  struct WorkerOut {
    std::vector<std::pair<std::vector<uint8_t>, int>> candidates; // bytes, parent
    std::vector<ViolationRecord> violations;
    uint64_t execs = 0;
  };
  std::vector<WorkerOut> outs(n);
  std::vector<Rng> rngs;
  for (int w = 0; w < n; ++w) rngs.push_back(rng.split());
  std::vector<std::thread> threads;
  uint64_t per = cfg.fuzzExecsPerRound / n + 1;
  for (int w = 0; w < n; ++w) {
    threads.emplace_back([&, w]() {
      std::vector<Seed> localQueue = queue_;
      CoverageMap localCov = cov;
      int localNext = 1000000 + w * 1000000;
      size_t localCursor = w % std::max<size_t>(localQueue.size(), 1);
      FuzzContext ctx{prog,       labels,    cfg.limits,  localCov,
                      localQueue, localNext, localCursor, cfg.candidatesPerSeed};
      size_t before = localQueue.size();
      auto res = fuzzRound(ctx, rngs[w], per);
      outs[w].execs = res.stats.execs;
      outs[w].violations = std::move(res.violations);
      for (size_t i = before; i < localQueue.size(); ++i)
        outs[w].candidates.push_back(
            {std::move(localQueue[i].bytes), localQueue[i].parentId});
    });
  }
  for (auto &t : threads) t.join();

  FuzzRoundResult merged;
  for (auto &o : outs) {
    merged.stats.execs += o.execs;
    for (auto &v : o.violations) merged.violations.push_back(std::move(v));
    for (auto &[bytes, parent] : o.candidates) {
      auto t = runConcrete(prog, labels, bytes, cfg.limits);
      for (LabelId id : t.labelsReached) merged.labelsReached.push_back(id);
      int fresh = cov.observe(t);
      if (fresh == 0) continue; // duplicate retention pruned
      Seed s;
      s.id = nextSeedId++;
      s.bytes = bytes;
      s.parentId = parent;
      s.origin = SeedOrigin::Fuzzer;
      s.plusCov = true;
      attachTraceInfo(prog, t, s);
      merged.newSeedIds.push_back(s.id);
      ++merged.stats.retained;
      queue_.push_back(std::move(s));
    }
  }
  return merged;
}

void Campaign::triage(const ConcolicResult &res, int round) {
  for (auto &tc : res.testCases) {
    auto t = runConcrete(prog, labels, tc.bytes, cfg.limits);
    int novelty = cov.noveltyOf(t);
    bool reachesUntriggered = false;
    for (LabelId id : t.labelsReached)
      if (!triggered.count(id)) reachesUntriggered = true;
    cov.observe(t);
    for (LabelId id : t.labelsReached) reachedGlobal.insert(id);
    for (auto &v : t.violations) noteViolation(v.label, tc.bytes, round);
    if (novelty > 0 || reachesUntriggered) {
      Seed s;
      s.id = nextSeedId++;
      s.bytes = tc.bytes;
      s.parentId = tc.sourceSeedId;
      s.origin = SeedOrigin::Concolic;
      s.plusCov = novelty > 0;
      switch (tc.kind) {
      case TestCaseOut::Kind::BranchFlip:
        s.provenance = "flip " + prog.nodeName(tc.site) + " -> " +
                       std::to_string(tc.newDir);
        break;
      case TestCaseOut::Kind::VerifyWitness:
        s.provenance = "full label " + std::to_string(tc.label);
        break;
      case TestCaseOut::Kind::OptimisticWitness:
        s.provenance = "optimistic label " + std::to_string(tc.label);
        break;
      }
      attachTraceInfo(prog, t, s);
      queue_.push_back(std::move(s));
    }
  }
  // A branch attempted this run that is still uncovered costs one attempt.
  for (auto &ab : res.attempted)
    if (!cov.hasEdge(packEdge(ab.site, ab.target))) ledger_.bump(ab.site, ab.dir);
}

CampaignResult Campaign::run(const std::function<void(const RoundStats &)> &onRound,
                             const SeedStore *store) {
  CampaignResult result;
  Rng rng(cfg.rngSeed);
  insertInitialSeeds(rng);

  ConcolicEngine engine(prog, labels, cfg.solver);
  size_t seedsWritten = 0;

  for (int round = 1; round <= cfg.rounds; ++round) {
    auto fz = fuzzPhase(rng);
    result.totalExecs += fz.stats.execs;
    for (LabelId id : fz.labelsReached) reachedGlobal.insert(id);
    for (auto &v : fz.violations) noteViolation(v.label, v.input, round);

    RoundStats rs;
    rs.round = round;
    rs.policy = policyName(cfg.policy);

    if (cfg.concolicEnabled) {
      std::vector<SeedScore> scores(queue_.size());
      for (size_t i = 0; i < queue_.size(); ++i)
        if (!queue_[i].concolicTested)
          scores[i] = scoreSeed(queue_[i], reach, ledger_, cov, cfg.decay);
      auto sel = selectForConcolic(queue_, scores, cfg.concolicSeedsPerRound,
                                   cfg.policy, rng);
      std::set<LabelId> triggeredIds;
      for (auto &[id, rec] : triggered) triggeredIds.insert(id);
      for (size_t idx : sel) {
        rs.scheduled.push_back(queue_[idx].id);
        uint64_t tu = concolicTimeout(queue_[idx], cov, cfg.tau);
        Seed seedCopy = queue_[idx]; // triage may reallocate the queue
        auto cres = engine.run(seedCopy, cov, triggeredIds, tu, rng);
        queue_[idx].concolicTested = true;
        triage(cres, round);
        for (auto &[id, rec] : triggered) triggeredIds.insert(id);
      }
    }

    rs.edges = cov.edgeCount();
    rs.pairs = cov.pairCount();
    rs.labelsReached = static_cast<int>(reachedGlobal.size());
    rs.labelsTriggered = static_cast<int>(triggered.size());
    int planted = 0;
    for (LabelId id : cfg.plantedIds) planted += triggered.count(id);
    rs.plantedTriggered = planted;

    if (store) {
      for (; seedsWritten < queue_.size(); ++seedsWritten) {
        store->writeSeed(queue_[seedsWritten]);
        if (queue_[seedsWritten].origin == SeedOrigin::Concolic)
          store->appendProvenance(queue_[seedsWritten]);
      }
      for (auto &[id, rec] : triggered)
        if (rec.witnessFile == "-")
          rec.witnessFile = store->writeWitness(id, rec.witness).string();
    }

    result.rounds.push_back(rs);
    if (onRound) onRound(rs);
    if (cfg.stopOnAllPlanted && allPlantedTriggered()) break;
  }

  for (auto &[id, rec] : triggered) result.bugs.push_back(rec);
  std::sort(result.bugs.begin(), result.bugs.end(),
            [](const BugRecord &a, const BugRecord &b) { return a.label < b.label; });
  return result;
}

} // namespace hfl
