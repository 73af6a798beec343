#include "hfl/labels.hpp"

#include <algorithm>
#include <sstream>

namespace hfl {

const char *familyName(Family f) {
  switch (f) {
  case Family::OOB: return "OOB";
  case Family::OversizedShift: return "OversizedShift";
  case Family::SignedOverflow: return "SignedOverflow";
  case Family::UnsignedOverflow: return "UnsignedOverflow";
  }
  return "?";
}

void LabelSet::buildIndex(const Program &p) {
  instrLabel.assign(p.functions.size(), {});
  for (size_t fn = 0; fn < p.functions.size(); ++fn) {
    auto &f = p.functions[fn];
    instrLabel[fn].resize(f.blocks.size());
    for (size_t b = 0; b < f.blocks.size(); ++b)
      instrLabel[fn][b].assign(f.blocks[b].instrs.size(), -1);
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    auto &l = labels[i];
    instrLabel[l.fn][l.block][l.instr] = static_cast<int32_t>(i);
  }
}

int LabelSet::liveCount() const {
  int n = 0;
  for (auto &l : labels) n += l.live;
  return n;
}

std::vector<LabelId> LabelSet::liveIdsIn(const Program &, int fn, int block) const {
  std::vector<LabelId> out;
  for (auto &l : labels)
    if (l.live && l.fn == fn && l.block == block) out.push_back(l.id);
  return out;
}

LabelSet placeLabels(const Program &p) {
  LabelSet ls;
  LabelId next = 1;
  for (size_t fn = 0; fn < p.functions.size(); ++fn) {
    auto &f = p.functions[fn];
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      auto &blk = f.blocks[b];
      for (size_t i = 0; i < blk.instrs.size(); ++i) {
        auto &ins = blk.instrs[i];
        Family fam;
        if (isBinArith(ins.op))
          fam = ins.isSigned ? Family::SignedOverflow : Family::UnsignedOverflow;
        else if (isShift(ins.op))
          fam = Family::OversizedShift;
        else if (ins.op == Op::ArrLoad || ins.op == Op::ArrStore)
          fam = Family::OOB;
        else
          continue;
        BugLabel l;
        l.id = next++;
        l.family = fam;
        l.fn = static_cast<int>(fn);
        l.block = static_cast<int>(b);
        l.instr = static_cast<int>(i);
        ls.labels.push_back(l);
      }
    }
  }
  ls.buildIndex(p);
  return ls;
}

bool oobViolation(uint64_t idx, Width idxWidth, int size) {
  I128 v = signExtend(idx, idxWidth);
  return v < 0 || v >= size;
}

bool shiftViolation(uint64_t amt, Width amtWidth, Width n) {
  I128 v = signExtend(amt, amtWidth);
  return v < 0 || v >= n;
}

bool signedOverflowViolation(Op op, uint64_t x, uint64_t y, Width n) {
  I128 xs = signExtend(x, n), ys = signExtend(y, n);
  I128 lo = -(I128{1} << (n - 1));
  I128 hi = (I128{1} << (n - 1)) - 1;
  I128 exact;
  switch (op) {
  case Op::Add: exact = xs + ys; break;
  case Op::Sub: exact = xs - ys; break;
  case Op::Mul: exact = xs * ys; break;
  case Op::Div:
    if (ys == 0) return false; // defined as 0, not a bug family in scope
    exact = (xs == lo && ys == -1) ? -lo : xs / ys;
    break;
  case Op::Rem:
    return false; // INT_MIN % -1 is defined as 0 here; always in range
  default:
    return false;
  }
  return exact < lo || exact > hi;
}

bool unsignedOverflowViolation(Op op, uint64_t x, uint64_t y, Width n) {
  U128 mask = maskOf(n);
  U128 xu = truncTo(x, n), yu = truncTo(y, n);
  switch (op) {
  case Op::Add: return xu + yu > mask;
  case Op::Mul: return xu * yu > mask;
  // x - y, x / y and x % y never exceed 2^n - 1 as exact integers.
  default: return false;
  }
}

std::vector<int> computeDominators(const Function &f) {
  int n = static_cast<int>(f.blocks.size());
  std::vector<std::vector<int>> preds(n);
  auto succs = [&](int b) {
    std::vector<int> out;
    auto &t = f.blocks[b].term;
    if (t.kind == Terminator::Kind::Jmp) out.push_back(t.thenIdx);
    else if (t.kind == Terminator::Kind::Br) {
      out.push_back(t.thenIdx);
      if (t.elseIdx != t.thenIdx) out.push_back(t.elseIdx);
    }
    return out;
  };
  for (int b = 0; b < n; ++b)
    for (int s : succs(b)) preds[s].push_back(b);

  // Postorder from the entry.
  std::vector<int> post, postNum(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<std::pair<int, size_t>> stack{{f.entryIdx, 0}};
  seen[f.entryIdx] = 1;
  std::vector<std::vector<int>> succCache(n);
  for (int b = 0; b < n; ++b) succCache[b] = succs(b);
  while (!stack.empty()) {
    auto &[b, i] = stack.back();
    if (i < succCache[b].size()) {
      int s = succCache[b][i++];
      if (!seen[s]) {
        seen[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      post.push_back(b);
      stack.pop_back();
    }
  }
  for (size_t i = 0; i < post.size(); ++i) postNum[post[i]] = static_cast<int>(i);

  std::vector<int> idom(n, -1);
  idom[f.entryIdx] = f.entryIdx;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (postNum[a] < postNum[b]) a = idom[a];
      while (postNum[b] < postNum[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      int b = *it;
      if (b == f.entryIdx) continue;
      int newIdom = -1;
      for (int pr : preds[b]) {
        if (postNum[pr] < 0 || idom[pr] < 0) continue;
        newIdom = newIdom < 0 ? pr : intersect(pr, newIdom);
      }
      if (newIdom >= 0 && idom[b] != newIdom) {
        idom[b] = newIdom;
        changed = true;
      }
    }
  }
  return idom;
}

namespace {

// Blocks reachable from `from` (inclusive) without ever visiting `banned`.
std::vector<char> reachAvoiding(const Function &f, int from, int banned) {
  std::vector<char> seen(f.blocks.size(), 0);
  if (from == banned) return seen;
  std::vector<int> work{from};
  seen[from] = 1;
  while (!work.empty()) {
    int b = work.back();
    work.pop_back();
    auto &t = f.blocks[b].term;
    int outs[2] = {-1, -1};
    if (t.kind == Terminator::Kind::Jmp) outs[0] = t.thenIdx;
    else if (t.kind == Terminator::Kind::Br) { outs[0] = t.thenIdx; outs[1] = t.elseIdx; }
    for (int s : outs)
      if (s >= 0 && s != banned && !seen[s]) {
        seen[s] = 1;
        work.push_back(s);
      }
  }
  return seen;
}

struct GuardInfo {
  int32_t reg = -1;      // compared register slot
  Width regWidth = 0;
  IntervalSet iv = IntervalSet::all(64);
  int cmpIdx = -1;       // index of the cmp inside the parent block
  std::string text;
};

// Locates the parent's branch condition definition and derives the value
// interval the taken arm enforces on the compared register.
bool analyzeGuard(const Function &f, int parent, bool thenArm, GuardInfo &gi) {
  auto &blk = f.blocks[parent];
  auto &t = blk.term;
  if (t.kind != Terminator::Kind::Br || t.cond.slot < 0) return false;
  int32_t condSlot = t.cond.slot;
  for (int i = static_cast<int>(blk.instrs.size()) - 1; i >= 0; --i) {
    auto &ins = blk.instrs[i];
    if (ins.destSlot != condSlot) continue;
    if (ins.op != Op::Cmp) return false;
    const Operand &a = ins.args[0], &b = ins.args[1];
    bool negate = !thenArm;
    if (!a.isImm && b.isImm) {
      gi.reg = a.slot;
      gi.regWidth = f.slotWidth[a.slot];
      gi.iv = compareInterval(ins.cmp, b.imm, gi.regWidth, negate);
    } else if (a.isImm && !b.isImm) {
      gi.reg = b.slot;
      gi.regWidth = f.slotWidth[b.slot];
      gi.iv = compareIntervalRight(ins.cmp, a.imm, gi.regWidth, negate);
    } else {
      return false; // not a comparison against a compile-time constant
    }
    gi.cmpIdx = i;
    std::ostringstream os;
    os << f.slotName[gi.reg] << " " << cmpName(ins.cmp) << " "
       << (a.isImm ? a.imm : b.imm) << (thenArm ? " (then)" : " (else)");
    gi.text = os.str();
    return true;
  }
  return false; // condition defined outside the parent block
}

struct CondRegs {
  // Condition operands as (slot or -1, imm value if slot < 0, width).
  struct Atom {
    int32_t slot = -1;
    uint64_t imm = 0;
    Width width = 64;
  };
  std::vector<Atom> atoms;
};

CondRegs conditionAtoms(const Function &f, const Instr &ins, Family fam) {
  CondRegs cr;
  auto add = [&](const Operand &o) {
    CondRegs::Atom a;
    if (o.isImm) {
      a.imm = o.imm;
      a.width = 64;
    } else {
      a.slot = o.slot;
      a.width = f.slotWidth[o.slot];
    }
    cr.atoms.push_back(a);
  };
  switch (fam) {
  case Family::OOB:
    add(ins.args[1]);
    break;
  case Family::OversizedShift:
    add(ins.args[1]);
    break;
  case Family::SignedOverflow:
  case Family::UnsignedOverflow:
    add(ins.args[0]);
    add(ins.args[1]);
    break;
  }
  return cr;
}

// Definitely-false test of the label condition under per-atom intervals.
bool conditionImpossible(const Instr &ins, Family fam,
                         const std::vector<IntervalSet> &ivs,
                         const std::vector<CondRegs::Atom> &atoms,
                         int arraySize) {
  auto setOf = [&](size_t i) {
    if (atoms[i].slot < 0)
      return IntervalSet::point(atoms[i].width, atoms[i].imm);
    return ivs[i];
  };
  switch (fam) {
  case Family::OOB: {
    IntervalSet s = setOf(0);
    if (s.empty()) return true;
    Width w = s.width;
    U128 hiOk = std::min<U128>(static_cast<U128>(arraySize) - 1,
                               w >= 64 ? (U128{1} << 63) - 1 : (U128{1} << (w - 1)) - 1);
    return s.umax() <= hiOk;
  }
  case Family::OversizedShift: {
    IntervalSet s = setOf(0);
    if (s.empty()) return true;
    Width w = s.width;
    U128 hiOk = std::min<U128>(ins.width - 1,
                               w >= 64 ? (U128{1} << 63) - 1 : (U128{1} << (w - 1)) - 1);
    return s.umax() <= hiOk;
  }
  case Family::SignedOverflow: {
    Width n = ins.width;
    IntervalSet xs = setOf(0), ys = setOf(1);
    if (xs.empty() || ys.empty()) return true;
    // Atom widths equal the op width for arith operands.
    I128 xlo = xs.smin(), xhi = xs.smax(), ylo = ys.smin(), yhi = ys.smax();
    I128 lo = -(I128{1} << (n - 1)), hi = (I128{1} << (n - 1)) - 1;
    switch (ins.op) {
    case Op::Add:
      return xlo + ylo >= lo && xhi + yhi <= hi;
    case Op::Sub:
      return xlo - yhi >= lo && xhi - ylo <= hi;
    case Op::Mul: {
      I128 c[4] = {xlo * ylo, xlo * yhi, xhi * ylo, xhi * yhi};
      I128 mn = c[0], mx = c[0];
      for (I128 v : c) { mn = std::min(mn, v); mx = std::max(mx, v); }
      return mn >= lo && mx <= hi;
    }
    case Op::Div:
      // Only INT_MIN / -1 overflows.
      return !(xs.contains(truncTo(static_cast<U128>(lo), n)) &&
               ys.contains(maskOf(n)));
    case Op::Rem:
      return true;
    default:
      return false;
    }
  }
  case Family::UnsignedOverflow: {
    Width n = ins.width;
    IntervalSet xs = setOf(0), ys = setOf(1);
    if (xs.empty() || ys.empty()) return true;
    U128 mask = maskOf(n);
    switch (ins.op) {
    case Op::Add: return xs.umax() + ys.umax() <= mask;
    case Op::Mul: return xs.umax() * ys.umax() <= mask;
    default: return true; // sub/div/rem cannot exceed 2^n - 1
    }
  }
  }
  return false;
}

} // namespace

std::pair<LabelSet, TrimReport> trimLabels(const Program &p, const LabelSet &ls) {
  LabelSet out = ls;
  TrimReport report;
  report.total = static_cast<int>(ls.labels.size());

  // Per-function single-def conversion map: slot -> defining instruction
  // (only when that is the slot's unique def in the function).
  struct ConvDef {
    const Instr *ins = nullptr;
    int block = -1, idx = -1;
  };
  std::vector<std::vector<int>> defCount(p.functions.size());
  std::vector<std::vector<ConvDef>> convDef(p.functions.size());
  for (size_t fn = 0; fn < p.functions.size(); ++fn) {
    auto &f = p.functions[fn];
    defCount[fn].assign(f.numSlots, 0);
    convDef[fn].assign(f.numSlots, {});
    for (auto &prm : f.params) defCount[fn][f.regSlot.at(prm.name)]++;
    for (size_t b = 0; b < f.blocks.size(); ++b)
      for (size_t i = 0; i < f.blocks[b].instrs.size(); ++i) {
        auto &ins = f.blocks[b].instrs[i];
        if (ins.destSlot < 0) continue;
        if (++defCount[fn][ins.destSlot] == 1 &&
            (ins.op == Op::Zext || ins.op == Op::Sext || ins.op == Op::Trunc))
          convDef[fn][ins.destSlot] = {&ins, static_cast<int>(b),
                                       static_cast<int>(i)};
        else if (defCount[fn][ins.destSlot] > 1)
          convDef[fn][ins.destSlot] = {};
      }
  }

  std::vector<std::vector<int>> idoms(p.functions.size());
  for (size_t fn = 0; fn < p.functions.size(); ++fn)
    idoms[fn] = computeDominators(p.functions[fn]);

  for (auto &label : out.labels) {
    if (!label.live) continue;
    auto &f = p.functions[label.fn];
    auto &idom = idoms[label.fn];
    int B = label.block;
    if (idom[B] < 0 || idom[B] == B) continue;
    int P = idom[B];

    auto &pterm = f.blocks[P].term;
    if (pterm.kind != Terminator::Kind::Br) continue;

    auto thenReach = reachAvoiding(f, pterm.thenIdx, P);
    auto elseReach = reachAvoiding(f, pterm.elseIdx, P);
    bool inThen = thenReach[B], inElse = elseReach[B];
    if (inThen == inElse) continue; // both arms (or neither) reach the label
    bool thenArm = inThen;

    GuardInfo gi;
    if (!analyzeGuard(f, P, thenArm, gi)) continue;
    if (gi.iv.empty()) continue; // arm statically dead; leave the label alone

    // Region on parent-free paths from the guarded arm to the label block.
    auto &armReach = thenArm ? thenReach : elseReach;
    std::vector<int> region;
    for (size_t b = 0; b < f.blocks.size(); ++b)
      if (armReach[b] && reachAvoiding(f, static_cast<int>(b), P)[B])
        region.push_back(static_cast<int>(b));

    bool cycleAtB = false;
    {
      auto &t = f.blocks[B].term;
      int outs[2] = {-1, -1};
      if (t.kind == Terminator::Kind::Jmp) outs[0] = t.thenIdx;
      else if (t.kind == Terminator::Kind::Br) { outs[0] = t.thenIdx; outs[1] = t.elseIdx; }
      for (int s : outs)
        if (s >= 0 && s != P && reachAvoiding(f, s, P)[B]) cycleAtB = true;
    }

    const Instr &site = f.blocks[B].instrs[label.instr];
    CondRegs cr = conditionAtoms(f, site, label.family);

    auto inRegion = [&](int blk) {
      return std::find(region.begin(), region.end(), blk) != region.end();
    };

    // Connect condition atoms to the guard register, through at most one
    // single-def conversion located after the guard.
    std::vector<IntervalSet> ivs(cr.atoms.size(), IntervalSet::all(64));
    std::vector<const Instr *> allowedDefs;
    bool anyConnected = false;
    for (size_t i = 0; i < cr.atoms.size(); ++i) {
      auto &atom = cr.atoms[i];
      ivs[i] = IntervalSet::all(atom.width == 0 ? 64 : atom.width);
      if (atom.slot < 0) continue;
      if (atom.slot == gi.reg) {
        ivs[i] = gi.iv;
        anyConnected = true;
        continue;
      }
      auto &cd = convDef[label.fn][atom.slot];
      if (cd.ins && !cd.ins->args[0].isImm && cd.ins->args[0].slot == gi.reg) {
        bool defOk =
            (inRegion(cd.block) && !(cd.block == B && cd.idx >= label.instr)) ||
            (cd.block == P && cd.idx > gi.cmpIdx);
        if (defOk) {
          ivs[i] = convertInterval(gi.iv, cd.ins->op, gi.regWidth, cd.ins->width);
          allowedDefs.push_back(cd.ins);
          anyConnected = true;
        }
      }
    }
    (void)anyConnected; // imm-only conditions can conflict with no link at all

    // Rule 3: constant conflict.
    int arraySize = label.family == Family::OOB
                        ? f.slotArraySize[site.args[0].slot]
                        : 0;
    if (!conditionImpossible(site, label.family, ivs, cr.atoms, arraySize))
      continue;

    // Rule 2: protected registers must not be redefined between the
    // guard and the label.
    std::vector<int32_t> protects{gi.reg};
    for (size_t i = 0; i < cr.atoms.size(); ++i)
      if (cr.atoms[i].slot >= 0) protects.push_back(cr.atoms[i].slot);
    auto isAllowedDef = [&](const Instr *ins) {
      return std::find(allowedDefs.begin(), allowedDefs.end(), ins) !=
             allowedDefs.end();
    };
    auto assignsProtected = [&](const Instr &ins) {
      if (ins.destSlot < 0) return false;
      return std::find(protects.begin(), protects.end(), ins.destSlot) !=
             protects.end();
    };
    bool redefined = false;
    for (int blk : region) {
      auto &instrs = f.blocks[blk].instrs;
      for (size_t i = 0; i < instrs.size() && !redefined; ++i) {
        const Instr &ins = instrs[i];
        if (!assignsProtected(ins) || isAllowedDef(&ins)) continue;
        if (blk == B) {
          if (static_cast<int>(i) < label.instr) redefined = true;
          else if (static_cast<int>(i) == label.instr) {
            if (cycleAtB) redefined = true; // self-redef feeds back around
          } else if (cycleAtB) {
            redefined = true;
          }
        } else {
          redefined = true;
        }
      }
      if (redefined) break;
    }
    // Tail of the parent block, after the comparison.
    if (!redefined) {
      auto &pinstrs = f.blocks[P].instrs;
      for (size_t i = gi.cmpIdx + 1; i < pinstrs.size(); ++i)
        if (assignsProtected(pinstrs[i]) && !isAllowedDef(&pinstrs[i])) {
          redefined = true;
          break;
        }
    }
    if (redefined) continue;

    label.live = false;
    report.trimmed.push_back({label.id, f.blocks[P].label, gi.text});
  }

  return {out, report};
}

} // namespace hfl
