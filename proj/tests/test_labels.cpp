#include "doctest.h"

#include <algorithm>
#include <set>

#include "hfl/interp.hpp"
#include "hfl/labels.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

TEST_CASE("placeLabels eligibility") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = add.s32 0, 1
  a = arr.alloc.8 4
  v3 = arr.load a, v1
  ret
}
)");
  LabelSet ls = placeLabels(p);
  REQUIRE(ls.labels.size() == 2);
  CHECK(ls.labels[0].family == Family::SignedOverflow);
  CHECK(ls.labels[1].family == Family::OOB);
  CHECK(ls.labels[0].id == 1);
  CHECK(ls.labels[1].id == 2);

  Program q = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u8 0
  c = cmp.ult v1, 4
  br c, b1, b2
b1:
  ret
b2:
  ret
}
)");
  CHECK(placeLabels(q).labels.empty());
}

namespace {

const char *kLoopProgram = R"(
input 4
func main(entry=b0) {
b0:
  a = arr.alloc.8 10
  i = const.s32 0
  jmp b1
b1:
  c = cmp.ult i, 10
  br c, b2, b3
b2:
  v = in.u8 0
  arr.store a, i, v
  i = add.s32 i, 1
  jmp b1
b3:
  ret
}
)";

} // namespace

TEST_CASE("the bounded loop trims both labels") {
  Program p = parseProgram(kLoopProgram);
  LabelSet ls = placeLabels(p);
  REQUIRE(ls.labels.size() == 2);
  auto [trimmed, report] = trimLabels(p, ls);
  CHECK(report.total == 2);
  CHECK(report.trimmed.size() == 2);
  CHECK(trimmed.liveCount() == 0);
  for (auto &ev : report.trimmed) CHECK(ev.parentBlock == "b1");
}

TEST_CASE("off-by-one guard keeps the OOB label") {
  std::string text = kLoopProgram;
  auto pos = text.find("cmp.ult i, 10");
  text.replace(pos, 13, "cmp.ule i, 10");
  Program p = parseProgram(text);
  LabelSet ls = placeLabels(p);
  auto [trimmed, report] = trimLabels(p, ls);
  // i == 10 passes the guard and indexes past the end: the OOB label
  // must stay live. The increment still cannot overflow.
  const BugLabel *oob = nullptr, *ovf = nullptr;
  for (auto &l : trimmed.labels)
    (l.family == Family::OOB ? oob : ovf) = &l;
  REQUIRE(oob != nullptr);
  REQUIRE(ovf != nullptr);
  CHECK(oob->live);
  CHECK_FALSE(ovf->live);
}

TEST_CASE("redefinition between guard and site blocks trimming") {
  Program p = parseProgram(R"(
input 4
func main(entry=b0) {
b0:
  a = arr.alloc.8 10
  i0 = in.u8 0
  i = zext.32 i0
  c = cmp.ult i, 10
  br c, b1, b2
b1:
  i = add.u32 i, 1
  v0 = const.u8 1
  arr.store a, i, v0
  jmp b2
b2:
  ret
}
)");
  LabelSet ls = placeLabels(p);
  auto [trimmed, report] = trimLabels(p, ls);
  for (auto &l : trimmed.labels)
    if (l.family == Family::OOB) CHECK(l.live);
}

TEST_CASE("trimming is monotone and live counts never grow") {
  Program p = parseProgram(kLoopProgram);
  LabelSet ls = placeLabels(p);
  auto [t1, r1] = trimLabels(p, ls);
  CHECK(t1.liveCount() <= ls.liveCount());
  auto [t2, r2] = trimLabels(p, t1);
  CHECK(t2.liveCount() == t1.liveCount());
  for (size_t i = 0; i < t1.labels.size(); ++i)
    if (!t1.labels[i].live) CHECK_FALSE(t2.labels[i].live);
}

TEST_CASE("immediate dominators: chain and diamond") {
  Program chain = parseProgram(R"(
func main(entry=b0) {
b0:
  jmp b1
b1:
  jmp b2
b2:
  ret
}
)");
  auto idom = computeDominators(chain.functions[0]);
  CHECK(idom[0] == 0);
  CHECK(idom[1] == 0);
  CHECK(idom[2] == 1);

  Program diamond = parseProgram(R"(
func main(entry=b0) {
b0:
  v = in.u8 0
  c = cmp.ult v, 5
  br c, b1, b2
b1:
  jmp b3
b2:
  jmp b3
b3:
  ret
}
)");
  auto idom2 = computeDominators(diamond.functions[0]);
  CHECK(idom2[1] == 0);
  CHECK(idom2[2] == 0);
  CHECK(idom2[3] == 0);
}

namespace {

// Random single-function CFG as IR text: every block either branches on a
// condition defined in the entry, jumps, or returns.
Program randomCfg(Rng &rng, int nBlocks) {
  std::string text = "input 2\nfunc main(entry=b0) {\n";
  for (int b = 0; b < nBlocks; ++b) {
    text += "b" + std::to_string(b) + ":\n";
    if (b == 0) {
      text += "  v0 = in.u8 0\n  c = cmp.ult v0, 128\n";
    }
    int kind = static_cast<int>(rng.below(3));
    if (b == nBlocks - 1) kind = 2;
    if (kind == 0) {
      int t = static_cast<int>(rng.below(nBlocks));
      text += "  jmp b" + std::to_string(t) + "\n";
    } else if (kind == 1) {
      int t0 = static_cast<int>(rng.below(nBlocks));
      int t1 = static_cast<int>(rng.below(nBlocks));
      text += "  br c, b" + std::to_string(t0) + ", b" + std::to_string(t1) + "\n";
    } else {
      text += "  ret\n";
    }
  }
  text += "}\n";
  return parseProgram(text);
}

// Dominators by brute force: intersect the node sets of all acyclic
// entry->b paths.
std::vector<std::set<int>> pathDominators(const Function &f) {
  int n = static_cast<int>(f.blocks.size());
  std::vector<std::set<int>> doms(n);
  std::vector<char> started(n, 0);
  std::vector<int> path;
  std::vector<char> onPath(n, 0);
  auto succs = [&](int b) {
    std::vector<int> out;
    auto &t = f.blocks[b].term;
    if (t.kind == Terminator::Kind::Jmp) out.push_back(t.thenIdx);
    else if (t.kind == Terminator::Kind::Br) {
      out.push_back(t.thenIdx);
      out.push_back(t.elseIdx);
    }
    return out;
  };
  auto visit = [&](auto &&self, int b) -> void {
    path.push_back(b);
    onPath[b] = 1;
    std::set<int> nodes(path.begin(), path.end());
    if (!started[b]) {
      started[b] = 1;
      doms[b] = nodes;
    } else {
      std::set<int> inter;
      std::set_intersection(doms[b].begin(), doms[b].end(), nodes.begin(),
                            nodes.end(), std::inserter(inter, inter.begin()));
      doms[b] = inter;
    }
    for (int s : succs(b))
      if (!onPath[s]) self(self, s);
    onPath[b] = 0;
    path.pop_back();
  };
  visit(visit, f.entryIdx);
  return doms;
}

} // namespace

TEST_CASE("random CFG dominators match the path-intersection oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    Program p = randomCfg(rng, 12);
    auto &f = p.functions[0];
    auto idom = computeDominators(f);
    auto doms = pathDominators(f);
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      if (doms[b].empty() && !(static_cast<int>(b) == f.entryIdx)) {
        // never visited: unreachable
        CHECK(idom[b] == -1);
        continue;
      }
      if (static_cast<int>(b) == f.entryIdx) {
        CHECK(idom[b] == f.entryIdx);
        continue;
      }
      // idom = proper dominator dominated by all other proper dominators
      int best = -1;
      size_t bestSize = 0;
      for (int d : doms[b]) {
        if (d == static_cast<int>(b)) continue;
        if (doms[d].size() >= bestSize) {
          bestSize = doms[d].size();
          best = d;
        }
      }
      CHECK(idom[b] == best);
      // and it lies on every acyclic entry->b path by construction
      if (best >= 0) CHECK(doms[b].count(best) == 1);
    }
  }
}

TEST_CASE("trim soundness spot check by exhaustive enumeration") {
  // Every trimmed label on these two programs must be untriggerable for
  // all 2^16 inputs (the acceptance suite does this at scale).
  for (const char *variant : {kLoopProgram}) {
    Program p = parseProgram(variant);
    LabelSet ls = placeLabels(p);
    auto [trimmed, report] = trimLabels(p, ls);
    std::set<LabelId> trimmedIds;
    for (auto &ev : report.trimmed) trimmedIds.insert(ev.id);
    if (trimmedIds.empty()) continue;
    RunLimits lim;
    lim.recordEdges = false;
    for (int x = 0; x < 256; ++x)
      for (int y = 0; y < 256; ++y) {
        std::vector<uint8_t> input{static_cast<uint8_t>(x),
                                   static_cast<uint8_t>(y)};
        auto t = runConcrete(p, ls, input, lim); // pre-trim set: all live
        for (auto &v : t.violations) CHECK(trimmedIds.count(v.label) == 0);
      }
  }
}
