#include "hfl/concolic.hpp"

#include <algorithm>

#include "hfl/arith.hpp"

namespace hfl {

namespace {

struct SymVal {
  SymRef sym;        // null when the value does not depend on input
  uint64_t conc = 0; // always maintained, masked to width
};

SymRef lift(const SymVal &v, Width w) {
  return v.sym ? v.sym : sConst(w, v.conc);
}

// Trigger condition for an overflow label, stated exactly at doubled width
// as a disjunction of range comparisons (which the solver can invert).
SymRef overflowCond(Op op, bool isSigned, Width n, SymRef x, SymRef y) {
  Width n2 = static_cast<Width>(2 * n);
  if (isSigned) {
    if (op == Op::Rem) return sConst(1, 0); // defined semantics keep it in range
    if (op == Op::Div) {
      // only INT_MIN / -1 escapes the range
      SymRef wide =
          sBin(op, true, n2, sExt(Op::Sext, n2, x), sExt(Op::Sext, n2, y));
      SymRef narrow = sExt(Op::Sext, n2, sBin(op, true, n, x, y));
      return sCmp(CmpKind::Ne, wide, narrow);
    }
    SymRef wide = sBin(op, true, n2, sExt(Op::Sext, n2, x), sExt(Op::Sext, n2, y));
    U128 hi = maskOf(n) >> 1;                          // 2^(n-1) - 1
    U128 lo = truncTo(~hi, n2);                        // -2^(n-1) at width n2
    return sBit(Op::Or, 1, sCmp(CmpKind::Slt, wide, sConst(n2, lo)),
                sCmp(CmpKind::Slt, sConst(n2, hi), wide));
  }
  if (op != Op::Add && op != Op::Mul) return sConst(1, 0);
  SymRef wide = sBin(op, false, n2, sExt(Op::Zext, n2, x), sExt(Op::Zext, n2, y));
  return sCmp(CmpKind::Ult, sConst(n2, maskOf(n)), wide); // mask < wide
}

SymRef oobCond(SymRef idx, int size) {
  SymRef se = idx->width < 64 ? sExt(Op::Sext, 64, idx) : idx;
  return sBit(Op::Or, 1, sCmp(CmpKind::Slt, se, sConst(64, 0)),
              sCmp(CmpKind::Sle, sConst(64, static_cast<U128>(size)), se));
}

SymRef shiftCond(SymRef amt, Width n) {
  SymRef se = amt->width < 64 ? sExt(Op::Sext, 64, amt) : amt;
  return sBit(Op::Or, 1, sCmp(CmpKind::Slt, se, sConst(64, 0)),
              sCmp(CmpKind::Sle, sConst(64, n), se));
}

} // namespace

ConcolicEngine::ConcolicEngine(const Program &p, const LabelSet &ls,
                               SolverConfig solverCfg)
    : prog(p), labels(ls), cfg(solverCfg) {}

void ConcolicEngine::reset() {
  path.clear();
  verifyQueries.clear();
  flipQueries.clear();
}

size_t ConcolicEngine::retainedStateSize() const {
  return path.capacity() * sizeof(PathEntry) +
         verifyQueries.capacity() * sizeof(VerifyQuery) +
         flipQueries.capacity() * sizeof(FlipQuery);
}

void ConcolicEngine::interpret(const Seed &seed, const CoverageMap &cov,
                               const std::set<LabelId> &alreadyTriggered,
                               uint64_t timeoutUnits, ConcolicResult &out) {
  std::vector<uint8_t> input = seed.bytes;
  input.resize(prog.inputLen, 0);

  struct Frame {
    int fn;
    int block;
    size_t instr;
    std::vector<SymVal> slots;
    int32_t pendingDest = -1;
    Width pendingWidth = 0;
  };
  std::vector<Frame> stack;
  std::vector<std::vector<SymVal>> arrays;
  arrays.emplace_back();

  std::set<std::pair<NodeId, uint8_t>> flipSeen;
  std::set<LabelId> verifySeen;

  {
    Frame f0;
    f0.fn = prog.entryIdx;
    f0.block = prog.functions[prog.entryIdx].entryIdx;
    f0.instr = 0;
    f0.slots.assign(prog.functions[prog.entryIdx].numSlots, {});
    stack.push_back(std::move(f0));
    out.blockSeq.push_back(prog.node(prog.entryIdx, stack[0].block));
  }

  auto pinConcretized = [&](const SymVal &v, Width w) {
    if (!v.sym) return;
    PathEntry pe;
    pe.constraint = sCmp(CmpKind::Eq, v.sym, sConst(w, v.conc));
    pe.kind = PathEntry::Kind::Concretize;
    path.push_back(std::move(pe));
  };

  auto maybeVerify = [&](const BugLabel *l, SymRef cond) {
    if (!l || !l->live) return;
    if (alreadyTriggered.count(l->id) || !verifySeen.insert(l->id).second)
      return;
    verifyQueries.push_back({path.size(), std::move(cond), l->id});
  };

  // Input-independent label condition: decide it on the spot. A concrete
  // violation means the seed itself is a witness; a concrete non-violation
  // is an unsatisfiable query under this path.
  auto concreteOutcome = [&](const BugLabel *l, bool bad,
                             const Seed &src) {
    if (!l || !l->live) return;
    if (alreadyTriggered.count(l->id) || !verifySeen.insert(l->id).second)
      return;
    if (bad) {
      out.verifications.push_back(
          {l->id, VerificationOutcome::Mode::Full, SolveStatus::Sat, {}});
      TestCaseOut tc;
      tc.kind = TestCaseOut::Kind::VerifyWitness;
      tc.bytes = src.bytes;
      tc.sourceSeedId = src.id;
      tc.label = l->id;
      out.testCases.push_back(std::move(tc));
    } else {
      out.verifications.push_back(
          {l->id, VerificationOutcome::Mode::Full, SolveStatus::Unsat, {}});
      out.verifications.push_back(
          {l->id, VerificationOutcome::Mode::Optimistic, SolveStatus::Unsat, {}});
    }
  };

  while (!stack.empty()) {
    if (out.unitsUsed >= timeoutUnits) {
      out.budgetExhausted = true;
      return;
    }
    Frame &fr = stack.back();
    const Function &fn = prog.functions[fr.fn];
    const BasicBlock &blk = fn.blocks[fr.block];

    if (fr.instr < blk.instrs.size()) {
      const Instr &ins = blk.instrs[fr.instr];
      const BugLabel *label =
          labels.instrLabel.empty()
              ? nullptr
              : labels.at(fr.fn, fr.block, static_cast<int>(fr.instr));
      ++out.unitsUsed;

      auto val = [&](const Operand &o) -> SymVal {
        if (o.isImm) return {nullptr, o.imm};
        return fr.slots[o.slot];
      };
      auto opndWidth = [&](const Operand &o) -> Width {
        return o.isImm ? 64 : fn.slotWidth[o.slot];
      };
      auto setDest = [&](SymVal v) {
        if (ins.destSlot < 0) return;
        Width dw = fn.slotWidth[ins.destSlot];
        if (dw) v.conc = lo64(truncTo(v.conc, dw));
        fr.slots[ins.destSlot] = std::move(v);
      };

      switch (ins.op) {
      case Op::Const:
        setDest({nullptr, lo64(truncTo(ins.aux, ins.width))});
        break;
      case Op::In: {
        std::vector<SymRef> bytes;
        uint64_t conc = 0;
        for (unsigned i = 0; i < ins.width / 8u; ++i) {
          uint32_t off = static_cast<uint32_t>(ins.aux + i);
          bytes.push_back(sInput(off));
          conc |= static_cast<uint64_t>(off < input.size() ? input[off] : 0)
                  << (8 * i);
        }
        setDest({sConcatLE(std::move(bytes)), conc});
        break;
      }
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Rem: {
        SymVal a = val(ins.args[0]), b = val(ins.args[1]);
        bool symbolic = a.sym || b.sym;
        if (label && label->live) {
          if (symbolic) {
            maybeVerify(label, overflowCond(ins.op, ins.isSigned, ins.width,
                                            lift(a, ins.width), lift(b, ins.width)));
          } else {
            bool bad = ins.isSigned
                           ? signedOverflowViolation(ins.op, a.conc, b.conc, ins.width)
                           : unsignedOverflowViolation(ins.op, a.conc, b.conc, ins.width);
            concreteOutcome(label, bad, seed);
          }
        }
        SymVal r;
        r.conc = wrapArith(ins.op, ins.isSigned, ins.width, a.conc, b.conc);
        if (symbolic)
          r.sym = sBin(ins.op, ins.isSigned, ins.width, lift(a, ins.width),
                       lift(b, ins.width));
        setDest(std::move(r));
        break;
      }
      case Op::Shl: case Op::Lshr: case Op::Ashr: {
        SymVal a = val(ins.args[0]), b = val(ins.args[1]);
        if (label && label->live) {
          if (b.sym)
            maybeVerify(label, shiftCond(lift(b, opndWidth(ins.args[1])),
                                         ins.width));
          else
            concreteOutcome(label,
                            shiftViolation(b.conc, opndWidth(ins.args[1]),
                                           ins.width),
                            seed);
        }
        SymVal r;
        r.conc = doShift(ins.op, ins.width, a.conc, b.conc);
        if (a.sym || b.sym)
          r.sym = sShift(ins.op, ins.width, lift(a, ins.width),
                         lift(b, ins.width));
        setDest(std::move(r));
        break;
      }
      case Op::And: case Op::Or: case Op::Xor: {
        SymVal a = val(ins.args[0]), b = val(ins.args[1]);
        SymVal r;
        uint64_t x = a.conc, y = b.conc;
        r.conc = ins.op == Op::And ? (x & y) : ins.op == Op::Or ? (x | y) : (x ^ y);
        if (a.sym || b.sym)
          r.sym = sBit(ins.op, ins.width, lift(a, ins.width), lift(b, ins.width));
        setDest(std::move(r));
        break;
      }
      case Op::Zext: {
        SymVal a = val(ins.args[0]);
        SymVal r{a.sym ? sExt(Op::Zext, ins.width, a.sym) : nullptr, a.conc};
        setDest(std::move(r));
        break;
      }
      case Op::Sext: {
        SymVal a = val(ins.args[0]);
        Width sw = opndWidth(ins.args[0]);
        SymVal r;
        r.conc = lo64(truncTo(static_cast<U128>(signExtend(a.conc, sw)), ins.width));
        if (a.sym) r.sym = sExt(Op::Sext, ins.width, a.sym);
        setDest(std::move(r));
        break;
      }
      case Op::Trunc: {
        SymVal a = val(ins.args[0]);
        SymVal r{a.sym ? sTrunc(ins.width, a.sym) : nullptr,
                 lo64(truncTo(a.conc, ins.width))};
        setDest(std::move(r));
        break;
      }
      case Op::Cmp: {
        SymVal a = val(ins.args[0]), b = val(ins.args[1]);
        Width w = ins.args[0].isImm ? opndWidth(ins.args[1])
                                    : opndWidth(ins.args[0]);
        SymVal r;
        r.conc = evalCmp(ins.cmp, w, a.conc, b.conc);
        if (a.sym || b.sym) r.sym = sCmp(ins.cmp, lift(a, w), lift(b, w));
        setDest(std::move(r));
        break;
      }
      case Op::ArrAlloc: {
        uint64_t handle = arrays.size();
        arrays.emplace_back(ins.aux, SymVal{});
        fr.slots[ins.destSlot] = {nullptr, handle};
        break;
      }
      case Op::ArrLoad: case Op::ArrStore: {
        bool isLoad = ins.op == Op::ArrLoad;
        uint64_t handle = fr.slots[ins.args[0].slot].conc;
        int size = fn.slotArraySize[ins.args[0].slot];
        SymVal idx = val(ins.args[1]);
        Width iw = opndWidth(ins.args[1]);
        if (label && label->live) {
          if (idx.sym)
            maybeVerify(label, oobCond(idx.sym, size));
          else
            concreteOutcome(label, oobViolation(idx.conc, iw, size), seed);
        }
        pinConcretized(idx, iw);
        bool bad = oobViolation(idx.conc, iw, size);
        if (isLoad) {
          if (bad) setDest({nullptr, 0});
          else setDest(arrays[handle][idx.conc]);
        } else if (!bad) {
          SymVal v = val(ins.args[2]);
          v.conc = lo64(truncTo(v.conc, fn.slotElemWidth[ins.args[0].slot]));
          arrays[handle][idx.conc] = std::move(v);
        }
        break;
      }
      case Op::Call: case Op::Icall: {
        int calleeIdx;
        size_t firstArg;
        if (ins.op == Op::Call) {
          calleeIdx = ins.calleeIdx;
          firstArg = 0;
        } else {
          SymVal idx = val(ins.args[0]);
          Width iw = opndWidth(ins.args[0]);
          uint64_t iv = lo64(truncTo(idx.conc, iw));
          pinConcretized(idx, iw);
          if (iv >= prog.funcTable.size()) {
            setDest({nullptr, 0});
            break;
          }
          calleeIdx = prog.funcTableIdx[iv];
          firstArg = 1;
        }
        if (static_cast<int>(stack.size()) >= 64) {
          out.budgetExhausted = true;
          return;
        }
        const Function &callee = prog.functions[calleeIdx];
        Frame child;
        child.fn = calleeIdx;
        child.block = callee.entryIdx;
        child.instr = 0;
        child.slots.assign(callee.numSlots, {});
        for (size_t i = 0; i < callee.params.size(); ++i) {
          size_t ap = firstArg + i;
          SymVal v = ap < ins.args.size() ? val(ins.args[ap]) : SymVal{};
          Width pw = callee.params[i].width;
          v.conc = lo64(truncTo(v.conc, pw));
          if (v.sym) {
            if (v.sym->width > pw) v.sym = sTrunc(pw, v.sym);
            else if (v.sym->width < pw) v.sym = sExt(Op::Zext, pw, v.sym);
          }
          child.slots[callee.regSlot.at(callee.params[i].name)] = std::move(v);
        }
        fr.pendingDest = ins.destSlot;
        fr.pendingWidth = ins.op == Op::Icall ? ins.width : 0;
        ++fr.instr;
        stack.push_back(std::move(child));
        out.blockSeq.push_back(prog.node(calleeIdx, callee.entryIdx));
        continue;
      }
      }
      ++fr.instr;
      continue;
    }

    // Terminator.
    ++out.unitsUsed;
    const Terminator &t = blk.term;
    switch (t.kind) {
    case Terminator::Kind::Jmp:
      fr.block = t.thenIdx;
      fr.instr = 0;
      out.blockSeq.push_back(prog.node(fr.fn, fr.block));
      break;
    case Terminator::Kind::Br: {
      SymVal c = t.cond.isImm ? SymVal{nullptr, t.cond.imm}
                              : fr.slots[t.cond.slot];
      bool taken = (c.conc & 1) != 0;
      NodeId site = prog.node(fr.fn, fr.block);
      if (c.sym) {
        uint8_t newDir = taken ? 1 : 0; // direction a flip would take
        NodeId oppNode =
            prog.node(fr.fn, taken ? t.elseIdx : t.thenIdx);
        if (!cov.hasEdge(packEdge(site, oppNode)) &&
            flipSeen.insert({site, newDir}).second) {
          FlipQuery q;
          q.pcLen = path.size();
          q.negated = taken ? sNot(c.sym) : c.sym;
          q.site = site;
          q.newDir = newDir;
          q.target = oppNode;
          flipQueries.push_back(std::move(q));
        }
        PathEntry pe;
        pe.constraint = taken ? c.sym : sNot(c.sym);
        pe.kind = PathEntry::Kind::Branch;
        pe.site = site;
        pe.dirTaken = taken ? 0 : 1;
        path.push_back(std::move(pe));
      }
      fr.block = taken ? t.thenIdx : t.elseIdx;
      fr.instr = 0;
      out.blockSeq.push_back(prog.node(fr.fn, fr.block));
      break;
    }
    case Terminator::Kind::Ret: {
      SymVal rv;
      if (t.retVal)
        rv = t.retVal->isImm ? SymVal{nullptr, t.retVal->imm}
                             : fr.slots[t.retVal->slot];
      Width rw = prog.functions[fr.fn].retWidth;
      if (rw) rv.conc = lo64(truncTo(rv.conc, rw));
      stack.pop_back();
      if (stack.empty()) return;
      Frame &parent = stack.back();
      if (parent.pendingDest >= 0) {
        if (parent.pendingWidth) {
          rv.conc = lo64(truncTo(rv.conc, parent.pendingWidth));
          if (rv.sym) {
            if (rv.sym->width > parent.pendingWidth)
              rv.sym = sTrunc(parent.pendingWidth, rv.sym);
            else if (rv.sym->width < parent.pendingWidth)
              rv.sym = sExt(Op::Zext, parent.pendingWidth, rv.sym);
          }
        }
        parent.slots[parent.pendingDest] = std::move(rv);
      }
      parent.pendingDest = -1;
      out.blockSeq.push_back(prog.node(parent.fn, parent.block));
      break;
    }
    }
  }
}

ConcolicResult ConcolicEngine::run(const Seed &seed,
                                   const CoverageMap &covSnapshot,
                                   const std::set<LabelId> &alreadyTriggered,
                                   uint64_t timeoutUnits, Rng &rng) {
  reset();
  ConcolicResult out;
  interpret(seed, covSnapshot, alreadyTriggered, timeoutUnits, out);
  out.path = path;
  if (out.budgetExhausted) return out;

  std::vector<uint8_t> hint = seed.bytes;
  hint.resize(prog.inputLen, 0);

  auto prefix = [&](size_t pcLen) {
    std::vector<SymRef> cs;
    cs.reserve(pcLen + 1);
    for (size_t i = 0; i < pcLen; ++i) cs.push_back(path[i].constraint);
    return cs;
  };

  // Verification queries first, then branch flips in path order.
  for (auto &q : verifyQueries) {
    if (out.unitsUsed >= timeoutUnits) {
      out.budgetExhausted = true;
      return out;
    }
    auto cs = prefix(q.pcLen);
    cs.push_back(q.cond);
    SolveResult full = solve(cs, hint, prog.inputLen, cfg, rng);
    out.unitsUsed += full.work;
    out.verifications.push_back(
        {q.label, VerificationOutcome::Mode::Full, full.status, full.support});
    if (full.status == SolveStatus::Sat) {
      TestCaseOut tc;
      tc.kind = TestCaseOut::Kind::VerifyWitness;
      tc.bytes = std::move(full.witness);
      tc.sourceSeedId = seed.id;
      tc.label = q.label;
      out.testCases.push_back(std::move(tc));
      continue;
    }
    // Optimistic: drop the path condition, solve the label condition alone.
    std::vector<SymRef> alone{q.cond};
    SolveResult opt = solve(alone, hint, prog.inputLen, cfg, rng);
    out.unitsUsed += opt.work;
    out.verifications.push_back(
        {q.label, VerificationOutcome::Mode::Optimistic, opt.status, opt.support});
    if (opt.status == SolveStatus::Sat) {
      TestCaseOut tc;
      tc.kind = TestCaseOut::Kind::OptimisticWitness;
      tc.bytes = std::move(opt.witness);
      tc.sourceSeedId = seed.id;
      tc.label = q.label;
      out.testCases.push_back(std::move(tc));
    }
  }

  for (auto &q : flipQueries) {
    if (out.unitsUsed >= timeoutUnits) {
      out.budgetExhausted = true;
      return out;
    }
    out.attempted.push_back({q.site, q.newDir, q.target});
    auto cs = prefix(q.pcLen);
    cs.push_back(q.negated);
    SolveResult r = solve(cs, hint, prog.inputLen, cfg, rng);
    out.unitsUsed += r.work;
    if (r.status == SolveStatus::Sat) {
      TestCaseOut tc;
      tc.kind = TestCaseOut::Kind::BranchFlip;
      tc.bytes = std::move(r.witness);
      tc.sourceSeedId = seed.id;
      tc.site = q.site;
      tc.newDir = q.newDir;
      out.testCases.push_back(std::move(tc));
    }
  }
  return out;
}

} // namespace hfl
