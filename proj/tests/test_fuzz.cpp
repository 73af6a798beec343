#include "doctest.h"

#include <set>

#include "hfl/fuzz.hpp"

using namespace hfl;

TEST_CASE("bucketOf matches the eight ranges") {
  CHECK(bucketOf(1) == 0);
  CHECK(bucketOf(2) == 1);
  CHECK(bucketOf(3) == 2);
  CHECK(bucketOf(4) == 3);
  CHECK(bucketOf(5) == 3);
  CHECK(bucketOf(7) == 3);
  CHECK(bucketOf(8) == 4);
  CHECK(bucketOf(15) == 4);
  CHECK(bucketOf(16) == 5);
  CHECK(bucketOf(31) == 5);
  CHECK(bucketOf(32) == 6);
  CHECK(bucketOf(127) == 6);
  CHECK(bucketOf(128) == 7);
  CHECK(bucketOf(1000000000) == 7);
  CHECK_THROWS_AS(bucketOf(0), Error);
}

TEST_CASE("coverage join is monotone and order-independent") {
  Program p = parseProgram(R"(
input 2
func main(entry=b0) {
b0:
  v0 = in.u8 0
  c = cmp.ult v0, 128
  br c, b1, b2
b1:
  ret
b2:
  ret
}
)");
  LabelSet ls = placeLabels(p);
  auto t1 = runConcrete(p, ls, std::vector<uint8_t>{0});
  auto t2 = runConcrete(p, ls, std::vector<uint8_t>{200});

  CoverageMap a, b;
  a.observe(t1);
  b.observe(t2);
  CoverageMap ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab == ba);
  CHECK(ab.pairCount() == 2); // one edge per arm
  // merging again changes nothing
  CoverageMap ab2 = ab;
  ab2.merge(a);
  CHECK(ab2 == ab);
}

TEST_CASE("mutation operators behave per class") {
  Rng rng(99);
  std::vector<uint8_t> donor(16, 0xAB);
  static const std::set<uint64_t> table = {0,      0xFF,       0x7F,      0x80,
                                           0xFFFF, 0x7FFFFFFF, 0x80000000};
  int seen[kMutKinds] = {0};
  for (int i = 0; i < 100000; ++i) {
    std::vector<uint8_t> bytes(16, 0);
    MutKind k = applyMutation(bytes, donor, rng);
    seen[static_cast<int>(k)]++;
    int diffs = 0;
    size_t firstDiff = 0;
    for (size_t j = 0; j < bytes.size(); ++j)
      if (bytes[j] != 0) {
        if (!diffs) firstDiff = j;
        ++diffs;
      }
    switch (k) {
    case MutKind::BitFlip: {
      REQUIRE(diffs == 1);
      uint8_t v = bytes[firstDiff];
      CHECK((v & (v - 1)) == 0); // single bit set
      break;
    }
    case MutKind::ByteFlip:
      REQUIRE(diffs == 1);
      CHECK(bytes[firstDiff] == 0xFF);
      break;
    case MutKind::Arith: {
      REQUIRE(diffs == 1);
      int v = bytes[firstDiff];
      bool plus = v >= 1 && v <= 35;
      bool minus = v >= 256 - 35;
      CHECK((plus || minus));
      break;
    }
    case MutKind::Interesting: {
      // written little-endian at an aligned offset; decode every width
      if (diffs == 0) break; // value 0 over zeros
      bool ok = false;
      for (int w : {1, 2, 4}) {
        for (size_t off = 0; off + w <= bytes.size(); off += w) {
          uint64_t v = 0;
          bool outside = false;
          for (size_t j = 0; j < bytes.size(); ++j)
            if ((j < off || j >= off + w) && bytes[j] != 0) outside = true;
          for (int j = 0; j < w; ++j) v |= uint64_t(bytes[off + j]) << (8 * j);
          if (!outside && table.count(v)) ok = true;
        }
      }
      CHECK(ok);
      break;
    }
    case MutKind::BlockCopyWithin:
      CHECK(diffs == 0); // copying zeros over zeros
      break;
    case MutKind::BlockDonor:
      for (size_t j = 0; j < bytes.size(); ++j)
        CHECK((bytes[j] == 0 || bytes[j] == 0xAB));
      break;
    }
    CHECK(bytes.size() == 16);
  }
  // every operator class fires
  for (int k = 0; k < kMutKinds; ++k) CHECK(seen[k] > 0);
}

namespace {

Program byteGuardProgram() {
  return parseProgram(R"(
input 4
func main(entry=b0) {
b0:
  v0 = in.u8 0
  c = cmp.eq v0, 0x41
  br c, b1, b2
b1:
  ret 1
b2:
  ret 0
}
)");
}

} // namespace

TEST_CASE("fuzzRound reaches a nearby byte guard") {
  Program p = byteGuardProgram();
  LabelSet ls = placeLabels(p);
  CoverageMap cov;
  std::vector<Seed> queue;
  int nextId = 1;
  size_t cursor = 0;

  Seed init;
  init.id = nextId++;
  init.bytes = {0x40, 0, 0, 0};
  init.origin = SeedOrigin::Initial;
  auto t = runConcrete(p, ls, init.bytes);
  cov.observe(t);
  init.plusCov = true;
  attachTraceInfo(p, t, init);
  queue.push_back(init);

  FuzzContext ctx{p, ls, {}, cov, queue, nextId, cursor};
  Rng rng(1);
  auto res = fuzzRound(ctx, rng, 5000);
  CHECK(cov.hasEdge(packEdge(p.node(0, 0), p.node(0, 1)))); // guard satisfied
  CHECK(res.newSeedIds.size() >= 1);
}

TEST_CASE("fuzzRound with zero budget is a no-op") {
  Program p = byteGuardProgram();
  LabelSet ls = placeLabels(p);
  CoverageMap cov;
  std::vector<Seed> queue;
  int nextId = 1;
  size_t cursor = 0;
  Seed init;
  init.id = nextId++;
  init.bytes = {0, 0, 0, 0};
  auto t = runConcrete(p, ls, init.bytes);
  cov.observe(t);
  attachTraceInfo(p, t, init);
  queue.push_back(init);
  uint64_t pairsBefore = cov.pairCount();

  FuzzContext ctx{p, ls, {}, cov, queue, nextId, cursor};
  Rng rng(5);
  auto res = fuzzRound(ctx, rng, 0);
  CHECK(res.newSeedIds.empty());
  CHECK(res.stats.execs == 0);
  CHECK(cov.pairCount() == pairsBefore);
}

TEST_CASE("retained seeds replay to their recorded traces") {
  Program p = parseProgram(R"(
input 4
func main(entry=b0) {
b0:
  v0 = in.u8 0
  v1 = in.u8 1
  c = cmp.ult v0, 64
  br c, b1, b2
b1:
  c1 = cmp.ult v1, 32
  br c1, b3, b4
b2:
  ret 2
b3:
  ret 3
b4:
  ret 4
}
)");
  LabelSet ls = placeLabels(p);
  CoverageMap cov;
  std::vector<Seed> queue;
  int nextId = 1;
  size_t cursor = 0;
  Seed init;
  init.id = nextId++;
  init.bytes = {0, 0, 0, 0};
  auto t0 = runConcrete(p, ls, init.bytes);
  cov.observe(t0);
  init.plusCov = true;
  attachTraceInfo(p, t0, init);
  queue.push_back(init);

  FuzzContext ctx{p, ls, {}, cov, queue, nextId, cursor};
  Rng rng(11);
  uint64_t pairsBefore = cov.pairCount();
  auto res = fuzzRound(ctx, rng, 3000);
  CHECK(cov.pairCount() > pairsBefore); // coverage grew monotonically

  for (const Seed &s : queue) {
    auto rt = runConcrete(p, ls, s.bytes);
    Seed copy = s;
    attachTraceInfo(p, rt, copy);
    CHECK(copy.pathDigest == s.pathDigest);
    CHECK(copy.labelsReached == s.labelsReached);
    // every recorded pair of a retained seed is covered
    for (auto &[e, n] : rt.edgeHits) CHECK(cov.hasPair(e, bucketOf(n)));
  }
}

TEST_CASE("a 32-bit magic guard resists a short mutation campaign") {
  Program p = parseProgram(R"(
input 8
func main(entry=b0) {
b0:
  v0 = in.u32 0
  c = cmp.eq v0, 0x1B7E9A53
  br c, b1, b2
b1:
  ret 1
b2:
  ret 0
}
)");
  LabelSet ls = placeLabels(p);
  CoverageMap cov;
  std::vector<Seed> queue;
  int nextId = 1;
  size_t cursor = 0;
  Seed init;
  init.id = nextId++;
  init.bytes.assign(8, 0);
  auto t = runConcrete(p, ls, init.bytes);
  cov.observe(t);
  init.plusCov = true;
  attachTraceInfo(p, t, init);
  queue.push_back(init);

  FuzzContext ctx{p, ls, {}, cov, queue, nextId, cursor};
  Rng rng(3);
  fuzzRound(ctx, rng, 20000);
  CHECK_FALSE(cov.hasEdge(packEdge(p.node(0, 0), p.node(0, 1))));
}

TEST_CASE("uncovered branches are recomputed against the current map") {
  Program p = byteGuardProgram();
  LabelSet ls = placeLabels(p);
  CoverageMap cov;
  Seed s;
  s.bytes = {0, 0, 0, 0};
  auto t = runConcrete(p, ls, s.bytes);
  cov.observe(t);
  attachTraceInfo(p, t, s);
  auto unc = uncoveredBranches(s, cov);
  REQUIRE(unc.size() == 1);
  CHECK(unc[0].oppDst == p.node(0, 1));

  // covering the opposite arm empties the list
  auto t2 = runConcrete(p, ls, std::vector<uint8_t>{0x41, 0, 0, 0});
  cov.observe(t2);
  CHECK(uncoveredBranches(s, cov).empty());
}
