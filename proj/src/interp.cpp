#include "hfl/interp.hpp"

#include "hfl/arith.hpp"

#include <algorithm>

namespace hfl {

bool ExecTrace::reachedLabel(LabelId id) const {
  return std::binary_search(labelsReached.begin(), labelsReached.end(), id);
}

bool ExecTrace::violatedLabel(LabelId id) const {
  for (auto &v : violations)
    if (v.label == id) return true;
  return false;
}

namespace {

struct Frame {
  int fn;
  int block;
  size_t instr; // next instruction index
  std::vector<uint64_t> slots;
  // Pending call result binding in this (caller) frame.
  int32_t pendingDest = -1;
  Width pendingWidth = 0; // icall result adaptation; 0 = strict call
};

} // namespace

ExecTrace runConcrete(const Program &p, const LabelSet &labels,
                      std::span<const uint8_t> input, const RunLimits &limits) {
  ExecTrace trace;
  std::vector<char> reachedMark(labels.labels.size() + 1, 0);
  std::vector<char> violatedMark(labels.labels.size() + 1, 0);
  std::vector<std::vector<uint64_t>> arrays;
  arrays.emplace_back(); // handle 0 stays unused

  auto inputByte = [&](uint64_t off) -> uint64_t {
    return off < input.size() ? input[off] : 0;
  };

  NodeId prevNode = 0;
  bool havePrev = false;
  auto enterNode = [&](NodeId n) {
    if (limits.recordEdges) {
      trace.blockSeq.push_back(n);
      if (havePrev) trace.edgeHits[packEdge(prevNode, n)]++;
    }
    prevNode = n;
    havePrev = true;
  };

  std::vector<Frame> stack;
  {
    Frame f0;
    f0.fn = p.entryIdx;
    f0.block = p.functions[p.entryIdx].entryIdx;
    f0.instr = 0;
    f0.slots.assign(p.functions[p.entryIdx].numSlots, 0);
    stack.push_back(std::move(f0));
    enterNode(p.node(p.entryIdx, p.functions[p.entryIdx].entryIdx));
  }

  auto noteLabel = [&](const BugLabel *l, bool violated,
                       std::initializer_list<uint64_t> ops) {
    if (!l || !l->live) return;
    if (!reachedMark[l->id]) {
      reachedMark[l->id] = 1;
      trace.labelsReached.push_back(l->id);
    }
    if (violated && !violatedMark[l->id]) {
      violatedMark[l->id] = 1;
      trace.violations.push_back({l->id, std::vector<uint64_t>(ops)});
    }
  };

  while (!stack.empty()) {
    if (trace.instrCount >= limits.instrBudget) {
      trace.stop = StopReason::BudgetExhausted;
      break;
    }
    Frame &fr = stack.back();
    const Function &fn = p.functions[fr.fn];
    const BasicBlock &blk = fn.blocks[fr.block];

    if (fr.instr < blk.instrs.size()) {
      const Instr &ins = blk.instrs[fr.instr];
      const BugLabel *label =
          labels.instrLabel.empty()
              ? nullptr
              : labels.at(fr.fn, fr.block, static_cast<int>(fr.instr));
      ++trace.instrCount;

      auto val = [&](const Operand &o) -> uint64_t {
        return o.isImm ? o.imm : fr.slots[o.slot];
      };
      auto opndWidth = [&](const Operand &o) -> Width {
        return o.isImm ? 64 : fn.slotWidth[o.slot];
      };
      auto setDest = [&](uint64_t v) {
        if (ins.destSlot < 0) return;
        Width dw = fn.slotWidth[ins.destSlot];
        fr.slots[ins.destSlot] = dw ? lo64(truncTo(v, dw)) : v;
      };

      switch (ins.op) {
      case Op::Const:
        setDest(lo64(truncTo(ins.aux, ins.width)));
        break;
      case Op::In: {
        uint64_t v = 0;
        for (unsigned i = 0; i < ins.width / 8u; ++i)
          v |= inputByte(ins.aux + i) << (8 * i);
        setDest(v);
        break;
      }
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Rem: {
        uint64_t a = val(ins.args[0]), b = val(ins.args[1]);
        bool bad = ins.isSigned
                       ? signedOverflowViolation(ins.op, a, b, ins.width)
                       : unsignedOverflowViolation(ins.op, a, b, ins.width);
        noteLabel(label, bad, {a, b});
        setDest(wrapArith(ins.op, ins.isSigned, ins.width, a, b));
        break;
      }
      case Op::Shl: case Op::Lshr: case Op::Ashr: {
        uint64_t a = val(ins.args[0]), b = val(ins.args[1]);
        bool bad = shiftViolation(b, opndWidth(ins.args[1]), ins.width);
        noteLabel(label, bad, {a, b});
        setDest(doShift(ins.op, ins.width, a, b));
        break;
      }
      case Op::And:
        setDest(val(ins.args[0]) & val(ins.args[1]));
        break;
      case Op::Or:
        setDest(val(ins.args[0]) | val(ins.args[1]));
        break;
      case Op::Xor:
        setDest(lo64(truncTo(val(ins.args[0]) ^ val(ins.args[1]), ins.width)));
        break;
      case Op::Zext:
        setDest(val(ins.args[0]));
        break;
      case Op::Sext: {
        Width sw = opndWidth(ins.args[0]);
        setDest(lo64(truncTo(static_cast<U128>(signExtend(val(ins.args[0]), sw)),
                             ins.width)));
        break;
      }
      case Op::Trunc:
        setDest(lo64(truncTo(val(ins.args[0]), ins.width)));
        break;
      case Op::Cmp: {
        Width w = ins.args[0].isImm ? opndWidth(ins.args[1])
                                    : opndWidth(ins.args[0]);
        setDest(evalCmp(ins.cmp, w, val(ins.args[0]), val(ins.args[1])));
        break;
      }
      case Op::ArrAlloc: {
        uint64_t handle = arrays.size();
        arrays.emplace_back(ins.aux, 0);
        fr.slots[ins.destSlot] = handle;
        break;
      }
      case Op::ArrLoad: {
        uint64_t handle = fr.slots[ins.args[0].slot];
        int size = fn.slotArraySize[ins.args[0].slot];
        uint64_t idx = val(ins.args[1]);
        bool bad = oobViolation(idx, opndWidth(ins.args[1]), size);
        noteLabel(label, bad, {idx});
        setDest(bad ? 0 : arrays[handle][idx]);
        break;
      }
      case Op::ArrStore: {
        uint64_t handle = fr.slots[ins.args[0].slot];
        int size = fn.slotArraySize[ins.args[0].slot];
        uint64_t idx = val(ins.args[1]);
        uint64_t v = val(ins.args[2]);
        bool bad = oobViolation(idx, opndWidth(ins.args[1]), size);
        noteLabel(label, bad, {idx});
        if (!bad)
          arrays[handle][idx] =
              lo64(truncTo(v, fn.slotElemWidth[ins.args[0].slot]));
        break;
      }
      case Op::Call: {
        const Function &callee = p.functions[ins.calleeIdx];
        if (static_cast<int>(stack.size()) >= limits.callDepth) {
          trace.stop = StopReason::CallDepthExceeded;
          std::sort(trace.labelsReached.begin(), trace.labelsReached.end());
          std::sort(trace.branchesTaken.begin(), trace.branchesTaken.end());
          return trace;
        }
        Frame child;
        child.fn = ins.calleeIdx;
        child.block = callee.entryIdx;
        child.instr = 0;
        child.slots.assign(callee.numSlots, 0);
        for (size_t i = 0; i < ins.args.size(); ++i) {
          uint64_t v = val(ins.args[i]);
          child.slots[callee.regSlot.at(callee.params[i].name)] =
              lo64(truncTo(v, callee.params[i].width));
        }
        fr.pendingDest = ins.destSlot;
        fr.pendingWidth = 0;
        ++fr.instr;
        stack.push_back(std::move(child));
        enterNode(p.node(ins.calleeIdx, callee.entryIdx));
        continue; // do not advance fr.instr again
      }
      case Op::Icall: {
        uint64_t idx = val(ins.args[0]);
        idx = lo64(truncTo(idx, opndWidth(ins.args[0])));
        if (idx >= p.funcTable.size()) {
          ++trace.icallOutOfTable;
          setDest(0);
          break;
        }
        if (static_cast<int>(stack.size()) >= limits.callDepth) {
          trace.stop = StopReason::CallDepthExceeded;
          std::sort(trace.labelsReached.begin(), trace.labelsReached.end());
          std::sort(trace.branchesTaken.begin(), trace.branchesTaken.end());
          return trace;
        }
        int calleeIdx = p.funcTableIdx[idx];
        const Function &callee = p.functions[calleeIdx];
        Frame child;
        child.fn = calleeIdx;
        child.block = callee.entryIdx;
        child.instr = 0;
        child.slots.assign(callee.numSlots, 0);
        for (size_t i = 0; i < callee.params.size(); ++i) {
          uint64_t v = i + 1 < ins.args.size() ? val(ins.args[i + 1]) : 0;
          child.slots[callee.regSlot.at(callee.params[i].name)] =
              lo64(truncTo(v, callee.params[i].width));
        }
        fr.pendingDest = ins.destSlot;
        fr.pendingWidth = ins.width;
        ++fr.instr;
        stack.push_back(std::move(child));
        enterNode(p.node(calleeIdx, callee.entryIdx));
        continue;
      }
      }
      ++fr.instr;
      continue;
    }

    // Terminator.
    ++trace.instrCount;
    const Terminator &t = blk.term;
    switch (t.kind) {
    case Terminator::Kind::Jmp:
      fr.block = t.thenIdx;
      fr.instr = 0;
      enterNode(p.node(fr.fn, fr.block));
      break;
    case Terminator::Kind::Br: {
      uint64_t c = t.cond.isImm ? t.cond.imm : fr.slots[t.cond.slot];
      bool taken = (c & 1) != 0;
      NodeId site = p.node(fr.fn, fr.block);
      auto key = std::make_pair(site, static_cast<uint8_t>(taken ? 0 : 1));
      if (std::find(trace.branchesTaken.begin(), trace.branchesTaken.end(),
                    key) == trace.branchesTaken.end())
        trace.branchesTaken.push_back(key);
      fr.block = taken ? t.thenIdx : t.elseIdx;
      fr.instr = 0;
      enterNode(p.node(fr.fn, fr.block));
      break;
    }
    case Terminator::Kind::Ret: {
      uint64_t rv = 0;
      if (t.retVal)
        rv = t.retVal->isImm ? t.retVal->imm : fr.slots[t.retVal->slot];
      rv = lo64(truncTo(rv, p.functions[fr.fn].retWidth ? p.functions[fr.fn].retWidth : 64));
      stack.pop_back();
      if (stack.empty()) {
        trace.retCode = rv;
        trace.stop = StopReason::Returned;
        std::sort(trace.labelsReached.begin(), trace.labelsReached.end());
        std::sort(trace.branchesTaken.begin(), trace.branchesTaken.end());
        return trace;
      }
      Frame &parent = stack.back();
      if (parent.pendingDest >= 0) {
        uint64_t v = rv;
        if (parent.pendingWidth) v = lo64(truncTo(v, parent.pendingWidth));
        parent.slots[parent.pendingDest] = v;
      }
      parent.pendingDest = -1;
      enterNode(p.node(parent.fn, parent.block));
      break;
    }
    }
  }

  std::sort(trace.labelsReached.begin(), trace.labelsReached.end());
  std::sort(trace.branchesTaken.begin(), trace.branchesTaken.end());
  return trace;
}

} // namespace hfl
