#include "hfl/fuzz.hpp"

#include <algorithm>

namespace hfl {

const char *originName(SeedOrigin o) {
  switch (o) {
  case SeedOrigin::Initial: return "initial";
  case SeedOrigin::Fuzzer: return "fuzzer";
  case SeedOrigin::Concolic: return "concolic";
  }
  return "?";
}

void attachTraceInfo(const Program &p, const ExecTrace &t, Seed &s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (NodeId n : t.blockSeq) {
    h ^= n;
    h *= 0x100000001b3ull;
  }
  s.pathDigest = h;
  s.labelsReached = t.labelsReached;
  s.branches.clear();
  for (auto &[site, dir] : t.branchesTaken) {
    auto [fn, blk] = p.nodeLoc(site);
    auto &term = p.functions[fn].blocks[blk].term;
    BranchObs ob;
    ob.site = site;
    ob.dir = dir;
    ob.takenDst = p.node(fn, dir == 0 ? term.thenIdx : term.elseIdx);
    ob.oppDst = p.node(fn, dir == 0 ? term.elseIdx : term.thenIdx);
    s.branches.push_back(ob);
  }
  s.meaningfulLen = 0;
  for (size_t i = 0; i < s.bytes.size(); ++i)
    if (s.bytes[i] != 0) s.meaningfulLen = static_cast<int>(i) + 1;
}

std::vector<BranchObs> uncoveredBranches(const Seed &s, const CoverageMap &cov) {
  std::vector<BranchObs> out;
  for (auto &b : s.branches)
    if (!cov.hasEdge(packEdge(b.site, b.oppDst))) out.push_back(b);
  return out;
}

MutKind applyMutation(std::vector<uint8_t> &bytes,
                      const std::vector<uint8_t> &donor, Rng &rng) {
  size_t len = bytes.size();
  MutKind kind = static_cast<MutKind>(rng.below(kMutKinds));
  switch (kind) {
  case MutKind::BitFlip: {
    size_t bit = rng.below(len * 8);
    bytes[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    break;
  }
  case MutKind::ByteFlip:
    bytes[rng.below(len)] ^= 0xFF;
    break;
  case MutKind::Arith: {
    size_t pos = rng.below(len);
    int delta = static_cast<int>(rng.between(1, 35));
    if (rng.chance(0.5)) delta = -delta;
    bytes[pos] = static_cast<uint8_t>(bytes[pos] + delta);
    break;
  }
  case MutKind::Interesting: {
    static const uint64_t vals[] = {0,      0xFF,       0x7F,      0x80,
                                    0xFFFF, 0x7FFFFFFF, 0x80000000};
    static const int widths[] = {1, 2, 4};
    int w = widths[rng.below(3)];
    uint64_t v;
    do {
      v = vals[rng.below(7)];
    } while (v > (w == 1 ? 0xFFull : w == 2 ? 0xFFFFull : 0xFFFFFFFFull));
    size_t slots = len / w;
    size_t off = rng.below(slots) * w;
    for (int i = 0; i < w; ++i)
      bytes[off + i] = static_cast<uint8_t>(v >> (8 * i));
    break;
  }
  case MutKind::BlockCopyWithin: {
    size_t n = 1 + rng.below(std::min<size_t>(len, 16));
    size_t src = rng.below(len - n + 1);
    size_t dst = rng.below(len - n + 1);
    std::vector<uint8_t> tmp(bytes.begin() + src, bytes.begin() + src + n);
    std::copy(tmp.begin(), tmp.end(), bytes.begin() + dst);
    break;
  }
  case MutKind::BlockDonor: {
    size_t n = 1 + rng.below(std::min<size_t>(len, 16));
    size_t src = rng.below(donor.size() >= n ? donor.size() - n + 1 : 1);
    size_t dst = rng.below(len - n + 1);
    for (size_t i = 0; i < n; ++i)
      bytes[dst + i] = src + i < donor.size() ? donor[src + i] : 0;
    break;
  }
  }
  return kind;
}

FuzzRoundResult fuzzRound(FuzzContext &ctx, Rng &rng, uint64_t execBudget) {
  FuzzRoundResult res;
  if (ctx.queue.empty() || execBudget == 0) return res;

  std::vector<char> labelSeen;
  std::vector<char> violSeen;
  size_t nLabels = ctx.labels.labels.size() + 1;
  labelSeen.assign(nLabels, 0);
  violSeen.assign(nLabels, 0);

  while (res.stats.execs < execBudget) {
    Seed &base = ctx.queue[ctx.cursor % ctx.queue.size()];
    ctx.cursor = (ctx.cursor + 1) % std::max<size_t>(ctx.queue.size(), 1);
    int candidates = ctx.candidatesPerSeed * (base.plusCov ? 4 : 1);
    int baseId = base.id;
    std::vector<uint8_t> baseBytes = base.bytes; // queue may reallocate

    for (int c = 0; c < candidates && res.stats.execs < execBudget; ++c) {
      std::vector<uint8_t> cand = baseBytes;
      const Seed &donor = ctx.queue[rng.below(ctx.queue.size())];
      applyMutation(cand, donor.bytes, rng);

      auto t = runConcrete(ctx.p, ctx.labels, cand, ctx.lim);
      ++res.stats.execs;

      for (LabelId id : t.labelsReached)
        if (!labelSeen[id]) {
          labelSeen[id] = 1;
          res.labelsReached.push_back(id);
        }
      for (auto &v : t.violations)
        if (!violSeen[v.label]) {
          violSeen[v.label] = 1;
          res.violations.push_back({v.label, cand});
        }

      int fresh = ctx.cov.observe(t);
      if (fresh > 0) {
        Seed s;
        s.id = ctx.nextSeedId++;
        s.bytes = std::move(cand);
        s.parentId = baseId;
        s.origin = SeedOrigin::Fuzzer;
        s.plusCov = true;
        attachTraceInfo(ctx.p, t, s);
        res.newSeedIds.push_back(s.id);
        ++res.stats.retained;
        ctx.queue.push_back(std::move(s));
      }
    }
  }
  return res;
}

} // namespace hfl
