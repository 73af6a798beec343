#include "doctest.h"

#include <numeric>

#include "hfl/interp.hpp"
#include "hfl/labels.hpp"
#include "hfl/rng.hpp"

using namespace hfl;

namespace {

ExecTrace run(const Program &p, const LabelSet &ls,
              std::vector<uint8_t> input, RunLimits lim = {}) {
  return runConcrete(p, ls, input, lim);
}

bool sameTrace(const ExecTrace &a, const ExecTrace &b) {
  return a.blockSeq == b.blockSeq && a.edgeHits == b.edgeHits &&
         a.labelsReached == b.labelsReached && a.retCode == b.retCode &&
         a.instrCount == b.instrCount && a.violations.size() == b.violations.size();
}

} // namespace

TEST_CASE("unsigned add overflow fires on 0xFFFFFFFF + 1") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u32 0
  v2 = add.u32 v1, 1
  ret v2
}
)");
  LabelSet ls = placeLabels(p);
  REQUIRE(ls.labels.size() == 1);
  CHECK(ls.labels[0].family == Family::UnsignedOverflow);

  auto t = run(p, ls, {0xFF, 0xFF, 0xFF, 0xFF});
  REQUIRE(t.violations.size() == 1);
  CHECK(t.violations[0].label == ls.labels[0].id);
  CHECK(t.retCode == 0); // wrapped
  CHECK(t.stop == StopReason::Returned);

  auto t2 = run(p, ls, {0xFE, 0xFF, 0xFF, 0xFF});
  CHECK(t2.violations.empty());
  CHECK(t2.retCode == 0xFFFFFFFFull);
}

TEST_CASE("input-independent program gives identical traces") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = const.u8 7
  v2 = mul.u8 v1, 3
  ret v2
}
)");
  LabelSet ls = placeLabels(p);
  auto a = run(p, ls, {});
  auto b = run(p, ls, {1, 2, 3, 4, 5});
  CHECK(sameTrace(a, b));
}

TEST_CASE("out-of-bounds load recovers with 0 and continues") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  a = arr.alloc.32 4
  v1 = in.u8 0
  v2 = arr.load a, v1
  v3 = add.u32 v2, 5
  ret v3
}
)");
  LabelSet ls = placeLabels(p);
  auto t = run(p, ls, {7});
  // OOB label fired, load yielded 0, add still executed.
  bool sawOob = false;
  for (auto &v : t.violations)
    sawOob |= ls.labels[v.label - 1].family == Family::OOB;
  CHECK(sawOob);
  CHECK(t.retCode == 5);
  CHECK(t.stop == StopReason::Returned);

  auto ok = run(p, ls, {2});
  for (auto &v : ok.violations)
    CHECK(ls.labels[v.label - 1].family != Family::OOB);
  CHECK(ok.retCode == 5);
}

TEST_CASE("store/load round trip inside bounds") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  a = arr.alloc.8 8
  v1 = in.u8 0
  arr.store a, 3, v1
  v2 = const.u8 3
  v3 = arr.load a, v2
  ret v3
}
)");
  LabelSet ls = placeLabels(p);
  CHECK(run(p, ls, {0x5A}).retCode == 0x5A);
}

TEST_CASE("edge-hit conservation across calls") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v0 = const.u8 0
  v1 = call f, v0
  c = cmp.ult v1, 10
  br c, b1, b2
b1:
  v2 = call f, v1
  ret v2
b2:
  ret v1
}
func f(x:8, entry=e0) {
e0:
  v1 = add.u8 x, 1
  ret v1
}
)");
  LabelSet ls = placeLabels(p);
  auto t = run(p, ls, {});
  uint64_t total = 0;
  for (auto &[e, n] : t.edgeHits) total += n;
  CHECK(total == t.blockSeq.size() - 1);
  CHECK(t.retCode == 2);

  // violations subset of labelsReached
  for (auto &v : t.violations) CHECK(t.reachedLabel(v.label));
}

TEST_CASE("determinism: repeated runs are bit-identical") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = in.u8 1
  v3 = mul.u8 v1, v2
  c = cmp.ult v3, 100
  br c, b1, b2
b1:
  v4 = add.u8 v3, 1
  ret v4
b2:
  ret v3
}
)");
  LabelSet ls = placeLabels(p);
  auto a = run(p, ls, {13, 21});
  auto b = run(p, ls, {13, 21});
  CHECK(sameTrace(a, b));
}

TEST_CASE("budget exhaustion flags the trace") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  jmp b0
}
)");
  LabelSet ls = placeLabels(p);
  RunLimits lim;
  lim.instrBudget = 1000;
  auto t = run(p, ls, {}, lim);
  CHECK(t.stop == StopReason::BudgetExhausted);
  CHECK(t.instrCount <= 1000);
}

TEST_CASE("call depth cap") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = call f, 0
  ret v1
}
func f(x:8, entry=b0) {
b0:
  v1 = add.u8 x, 1
  v2 = call f, v1
  ret v1
}
)");
  LabelSet ls = placeLabels(p);
  auto t = run(p, ls, {});
  CHECK(t.stop == StopReason::CallDepthExceeded);
}

TEST_CASE("icall out of table skips and zeroes") {
  Program p = parseProgram(R"(
table f
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = icall.32 v1, 5
  v3 = add.u32 v2, 1
  ret v3
}
func f(x:32, entry=e) {
e:
  v1 = mul.u32 x, 2
  ret v1
}
)");
  LabelSet ls = placeLabels(p);
  auto hit = run(p, ls, {0});
  CHECK(hit.retCode == 11);
  CHECK(hit.icallOutOfTable == 0);
  auto miss = run(p, ls, {9});
  CHECK(miss.retCode == 1);
  CHECK(miss.icallOutOfTable == 1);
}

TEST_CASE("multi-byte input reads are little-endian") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u32 0
  ret v1
}
)");
  LabelSet ls = placeLabels(p);
  auto t = run(p, ls, {0xBE, 0xBA, 0xFE, 0xCA});
  CHECK(t.retCode == 0xCAFEBABEull);
  // short input zero-extends
  auto t2 = run(p, ls, {0xBE});
  CHECK(t2.retCode == 0xBEull);
}

TEST_CASE("division corner cases are total") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = in.u8 1
  v3 = div.s8 v1, v2
  v4 = rem.s8 v1, v2
  v5 = div.u8 v1, v2
  v6 = add.u8 v3, v4
  v7 = add.u8 v6, v5
  ret v7
}
)");
  LabelSet ls = placeLabels(p);
  // y = 0: all divisions yield 0
  CHECK(run(p, ls, {55, 0}).retCode == 0);
  // INT8_MIN / -1 wraps to INT8_MIN, rem gives 0
  auto t = run(p, ls, {0x80, 0xFF});
  // div.s8 -> 0x80 (wrap, flagged), rem -> 0, div.u8 128/255 -> 0
  CHECK(t.retCode == 0x80);
  bool sawSigned = false;
  for (auto &v : t.violations)
    sawSigned |= ls.labels[v.label - 1].family == Family::SignedOverflow;
  CHECK(sawSigned);
}

TEST_CASE("oversized shifts mask the amount") {
  Program p = parseProgram(R"(
func main(entry=b0) {
b0:
  v1 = in.u8 0
  v2 = const.u8 1
  v3 = shl.8 v2, v1
  ret v3
}
)");
  LabelSet ls = placeLabels(p);
  auto t = run(p, ls, {9}); // 9 & 7 == 1
  CHECK(t.retCode == 2);
  REQUIRE(t.violations.size() == 1);
  CHECK(ls.labels[t.violations[0].label - 1].family == Family::OversizedShift);
  CHECK(run(p, ls, {3}).violations.empty());
}

// Wrap-semantics oracle: random straight-line 8-bit programs evaluated by
// an independent big-integer interpreter reduced mod 2^8 at every step.
namespace {

struct OracleOp {
  int kind; // 0 const, 1 in, 2.. binary ops
  int a, b; // source value indices (or imm/offset)
  uint64_t imm;
  bool aImm, bImm;
};

long long oracleEval(const std::vector<OracleOp> &ops,
                     const std::vector<uint8_t> &input) {
  auto s8 = [](long long v) { return v >= 128 ? v - 256 : v; };
  auto wrap = [](long long v) { return ((v % 256) + 256) % 256; };
  std::vector<long long> vals;
  for (auto &o : ops) {
    auto A = [&]() { return o.aImm ? (long long)(o.imm & 0xFF) : vals[o.a]; };
    auto B = [&]() { return o.bImm ? (long long)(o.imm & 0xFF) : vals[o.b]; };
    long long r = 0;
    switch (o.kind) {
    case 0: r = (long long)(o.imm & 0xFF); break;
    case 1: r = o.imm < input.size() ? input[o.imm] : 0; break;
    case 2: r = wrap(A() + B()); break;
    case 3: r = wrap(A() - B()); break;
    case 4: r = wrap(A() * B()); break;
    case 5: r = B() == 0 ? 0 : wrap(A() / B()); break;                 // udiv
    case 6: r = B() == 0 ? 0 : wrap(A() % B()); break;                 // urem
    case 7: { // sdiv with INT_MIN/-1 wrap
      long long x = s8(A()), y = s8(B());
      if (y == 0) r = 0;
      else if (x == -128 && y == -1) r = 0x80;
      else r = wrap(x / y);
      break;
    }
    case 8: { // srem, INT_MIN % -1 == 0
      long long x = s8(A()), y = s8(B());
      r = y == 0 ? 0 : (x == -128 && y == -1 ? 0 : wrap(x % y));
      break;
    }
    case 9: r = wrap(A() << (B() & 7)); break;
    case 10: r = A() >> (B() & 7); break;
    case 11: r = wrap(s8(A()) >> (B() & 7)); break; // ashr
    case 12: r = A() & B(); break;
    case 13: r = A() | B(); break;
    case 14: r = A() ^ B(); break;
    }
    vals.push_back(r);
  }
  return vals.back();
}

} // namespace

TEST_CASE("random 8-bit programs match the big-integer oracle") {
  Rng rng(20240901);
  for (int trial = 0; trial < 120; ++trial) {
    int n = 3 + static_cast<int>(rng.below(18));
    std::vector<OracleOp> ops;
    std::string text = "input 4\nfunc main(entry=b0) {\nb0:\n";
    for (int i = 0; i < n; ++i) {
      OracleOp o{};
      if (i < 2) o.kind = static_cast<int>(rng.below(2));
      else o.kind = static_cast<int>(rng.below(15));
      auto pick = [&](int &idx, bool &isImm, uint64_t &imm) {
        if (i > 0 && !rng.chance(0.25)) {
          idx = static_cast<int>(rng.below(i));
          isImm = false;
        } else {
          isImm = true;
          imm = rng.below(256);
        }
      };
      char buf[120];
      const char *names[] = {"",        "",        "add.u8", "sub.u8", "mul.u8",
                             "div.u8",  "rem.u8",  "div.s8", "rem.s8", "shl.8",
                             "lshr.8",  "ashr.8",  "and.8",  "or.8",   "xor.8"};
      if (o.kind == 0) {
        o.imm = rng.below(256);
        snprintf(buf, sizeof buf, "  v%d = const.u8 %llu\n", i,
                 static_cast<unsigned long long>(o.imm));
      } else if (o.kind == 1) {
        o.imm = rng.below(4);
        snprintf(buf, sizeof buf, "  v%d = in.u8 %llu\n", i,
                 static_cast<unsigned long long>(o.imm));
      } else {
        uint64_t immA = 0, immB = 0;
        pick(o.a, o.aImm, immA);
        // reuse one imm field; keep at most one immediate operand
        pick(o.b, o.bImm, immB);
        if (o.aImm && o.bImm) { o.aImm = false; o.a = i > 0 ? i - 1 : 0; }
        o.imm = o.aImm ? immA : immB;
        std::string lhs = o.aImm ? std::to_string(o.imm) : "v" + std::to_string(o.a);
        std::string rhs = o.bImm ? std::to_string(o.imm) : "v" + std::to_string(o.b);
        if (o.kind < 2) continue;
        snprintf(buf, sizeof buf, "  v%d = %s %s, %s\n", i, names[o.kind],
                 lhs.c_str(), rhs.c_str());
      }
      text += buf;
      ops.push_back(o);
    }
    text += "  ret v" + std::to_string(n - 1) + "\n}\n";

    Program p = parseProgram(text);
    LabelSet empty;
    empty.buildIndex(p);
    for (int k = 0; k < 4; ++k) {
      std::vector<uint8_t> input(4);
      for (auto &b : input) b = static_cast<uint8_t>(rng.below(256));
      auto t = runConcrete(p, empty, input);
      long long expect = oracleEval(ops, input);
      CHECK(static_cast<long long>(t.retCode) == expect);
    }
  }
}
