#include "hfl/icfg.hpp"

#include <algorithm>
#include <set>

namespace hfl {

bool InterCfg::hasEdge(NodeId a, NodeId b) const {
  auto &s = succs[a];
  return std::find(s.begin(), s.end(), b) != s.end();
}

namespace {

// Abstract table-index value: a small set of concrete values or top.
struct IdxSet {
  bool top = false;
  std::set<uint64_t> vals;

  bool join(const IdxSet &o) {
    if (top) return false;
    if (o.top) { top = true; vals.clear(); return true; }
    bool grew = false;
    for (uint64_t v : o.vals) grew |= vals.insert(v).second;
    return grew;
  }
  bool joinVal(uint64_t v) {
    if (top) return false;
    return vals.insert(v).second;
  }
  bool makeTop() {
    if (top) return false;
    top = true;
    vals.clear();
    return true;
  }
  static IdxSet ofTop() { IdxSet s; s.top = true; return s; }
};

} // namespace

InterCfg buildInterCfg(const Program &p) {
  InterCfg cfg;
  cfg.prog = &p;

  // slotVals[fn][slot]: possible table-index values flowing into the slot.
  std::vector<std::vector<IdxSet>> slotVals(p.functions.size());
  for (size_t fn = 0; fn < p.functions.size(); ++fn)
    slotVals[fn].resize(p.functions[fn].numSlots);

  auto operandVal = [&](int fn, const Operand &o) -> IdxSet {
    if (o.isImm) {
      IdxSet s;
      s.vals.insert(o.imm);
      return s;
    }
    return slotVals[fn][o.slot];
  };

  // Resolved targets per icall site, by value-set fixpoint.
  std::map<std::tuple<int, int, int>, std::vector<int>> icallTargets;
  auto resolveTargets = [&](const IdxSet &s) {
    std::vector<int> out;
    if (s.top) {
      out = p.funcTableIdx;
    } else {
      for (uint64_t v : s.vals)
        if (v < p.funcTable.size()) out.push_back(p.funcTableIdx[v]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t fn = 0; fn < p.functions.size(); ++fn) {
      auto &f = p.functions[fn];
      for (size_t b = 0; b < f.blocks.size(); ++b) {
        for (size_t i = 0; i < f.blocks[b].instrs.size(); ++i) {
          auto &ins = f.blocks[b].instrs[i];
          auto bindCallee = [&](int calleeIdx, size_t firstArg) {
            auto &callee = p.functions[calleeIdx];
            for (size_t a = 0; a < callee.params.size(); ++a) {
              size_t argPos = firstArg + a;
              IdxSet av;
              if (argPos < ins.args.size()) {
                IdxSet raw = operandVal(static_cast<int>(fn), ins.args[argPos]);
                if (raw.top) av = IdxSet::ofTop();
                else
                  for (uint64_t v : raw.vals)
                    av.vals.insert(lo64(truncTo(v, callee.params[a].width)));
              } else {
                av.vals.insert(0); // missing icall args bind to 0
              }
              int32_t ps = callee.regSlot.at(callee.params[a].name);
              changed |= slotVals[calleeIdx][ps].join(av);
            }
          };
          if (ins.destSlot >= 0) {
            IdxSet v;
            switch (ins.op) {
            case Op::Const:
              v.vals.insert(lo64(truncTo(ins.aux, ins.width)));
              break;
            case Op::Zext:
              v = operandVal(static_cast<int>(fn), ins.args[0]);
              break;
            case Op::Sext: {
              IdxSet src = operandVal(static_cast<int>(fn), ins.args[0]);
              if (src.top) v = IdxSet::ofTop();
              else {
                Width sw = f.slotWidth[ins.args[0].slot];
                for (uint64_t x : src.vals)
                  v.vals.insert(lo64(truncTo(
                      static_cast<U128>(signExtend(x, sw)), ins.width)));
              }
              break;
            }
            case Op::Trunc: {
              IdxSet src = operandVal(static_cast<int>(fn), ins.args[0]);
              if (src.top) v = IdxSet::ofTop();
              else
                for (uint64_t x : src.vals)
                  v.vals.insert(lo64(truncTo(x, ins.width)));
              break;
            }
            case Op::Call: {
              auto &callee = p.functions[ins.calleeIdx];
              for (auto &blk : callee.blocks)
                if (blk.term.kind == Terminator::Kind::Ret && blk.term.retVal) {
                  IdxSet raw = operandVal(ins.calleeIdx, *blk.term.retVal);
                  if (raw.top) v.makeTop();
                  else
                    for (uint64_t rv : raw.vals)
                      v.vals.insert(lo64(truncTo(rv, callee.retWidth)));
                }
              break;
            }
            default:
              v = IdxSet::ofTop();
              break;
            }
            changed |= slotVals[fn][ins.destSlot].join(v);
          }
          if (ins.op == Op::Call) bindCallee(ins.calleeIdx, 0);
          if (ins.op == Op::Icall) {
            IdxSet idx = operandVal(static_cast<int>(fn), ins.args[0]);
            auto targets = resolveTargets(idx);
            auto key = std::make_tuple(static_cast<int>(fn), static_cast<int>(b),
                                       static_cast<int>(i));
            auto &slot = icallTargets[key];
            if (slot != targets) {
              slot = targets;
              changed = true;
            }
            for (int t : targets) bindCallee(t, 1);
          }
        }
      }
    }
  }
  cfg.icallTargets = std::move(icallTargets);

  // Edges.
  cfg.succs.assign(p.numNodes, {});
  std::vector<std::vector<NodeId>> exitBlocks(p.functions.size());
  for (size_t fn = 0; fn < p.functions.size(); ++fn)
    for (size_t b = 0; b < p.functions[fn].blocks.size(); ++b)
      if (p.functions[fn].blocks[b].term.kind == Terminator::Kind::Ret)
        exitBlocks[fn].push_back(p.node(static_cast<int>(fn), static_cast<int>(b)));

  auto addEdge = [&](NodeId a, NodeId b) {
    auto &s = cfg.succs[a];
    if (std::find(s.begin(), s.end(), b) == s.end()) s.push_back(b);
  };

  for (size_t fn = 0; fn < p.functions.size(); ++fn) {
    auto &f = p.functions[fn];
    for (size_t b = 0; b < f.blocks.size(); ++b) {
      NodeId here = p.node(static_cast<int>(fn), static_cast<int>(b));
      auto &t = f.blocks[b].term;
      if (t.kind == Terminator::Kind::Jmp)
        addEdge(here, p.node(static_cast<int>(fn), t.thenIdx));
      else if (t.kind == Terminator::Kind::Br) {
        addEdge(here, p.node(static_cast<int>(fn), t.thenIdx));
        addEdge(here, p.node(static_cast<int>(fn), t.elseIdx));
      }
      for (size_t i = 0; i < f.blocks[b].instrs.size(); ++i) {
        auto &ins = f.blocks[b].instrs[i];
        std::vector<int> callees;
        if (ins.op == Op::Call) callees.push_back(ins.calleeIdx);
        else if (ins.op == Op::Icall)
          callees = cfg.icallTargets[{static_cast<int>(fn), static_cast<int>(b),
                                      static_cast<int>(i)}];
        for (int c : callees) {
          addEdge(here, p.node(c, p.functions[c].entryIdx));
          for (NodeId ex : exitBlocks[c]) addEdge(ex, here);
        }
      }
    }
  }
  for (auto &s : cfg.succs) std::sort(s.begin(), s.end());
  return cfg;
}

std::vector<LabelId> ReachTable::reachSet(NodeId n) const {
  std::vector<LabelId> out;
  auto &bits = sccReach[sccOf[n]];
  for (size_t w = 0; w < bits.size(); ++w) {
    uint64_t word = bits[w];
    while (word) {
      int bit = __builtin_ctzll(word);
      out.push_back(static_cast<LabelId>(w * 64 + bit));
      word &= word - 1;
    }
  }
  return out;
}

int ReachTable::potential(NodeId n) const {
  auto &reach = sccReach[sccOf[n]];
  int extra = 0;
  for (LabelId id : own[n]) {
    size_t w = static_cast<size_t>(id) / 64, b = static_cast<size_t>(id) % 64;
    if (w >= reach.size() || !(reach[w] >> b & 1)) ++extra;
  }
  return counts[n] + extra;
}

ReachTable computeReach(const InterCfg &cfg, const LabelSet &ls) {
  const Program &p = *cfg.prog;
  ReachTable rt;
  size_t maxId = 0;
  for (auto &l : ls.labels) maxId = std::max<size_t>(maxId, l.id);
  rt.words = maxId / 64 + 1;

  rt.own.assign(p.numNodes, {});
  for (auto &l : ls.labels)
    if (l.live) rt.own[p.node(l.fn, l.block)].push_back(l.id);

  // Tarjan SCC.
  size_t n = p.numNodes;
  std::vector<int> index(n, -1), low(n, 0), scc(n, -1);
  std::vector<char> onStack(n, 0);
  std::vector<NodeId> stack;
  int counter = 0, sccCount = 0;

  struct WorkItem { NodeId v; size_t child; };
  for (NodeId root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<WorkItem> work{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onStack[root] = 1;
    while (!work.empty()) {
      auto &[v, child] = work.back();
      if (child < cfg.succs[v].size()) {
        NodeId w = cfg.succs[v][child++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          onStack[w] = 1;
          work.push_back({w, 0});
        } else if (onStack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      } else {
        if (low[v] == index[v]) {
          while (true) {
            NodeId w = stack.back();
            stack.pop_back();
            onStack[w] = 0;
            scc[w] = sccCount;
            if (w == v) break;
          }
          ++sccCount;
        }
        NodeId vv = v;
        work.pop_back();
        if (!work.empty()) low[work.back().v] = std::min(low[work.back().v], low[vv]);
      }
    }
  }

  // Tarjan emits SCCs in reverse topological order: scc 0 has no
  // successors outside itself that are unprocessed. Verify ordering by
  // processing in emission order and asserting successors are done.
  std::vector<char> cyclic(sccCount, 0);
  std::vector<std::vector<int>> sccSuccs(sccCount);
  std::vector<int> sccSize(sccCount, 0);
  for (NodeId v = 0; v < n; ++v) {
    ++sccSize[scc[v]];
    for (NodeId w : cfg.succs[v]) {
      if (scc[w] == scc[v]) cyclic[scc[v]] = 1; // self-loop or larger cycle
      else sccSuccs[scc[v]].push_back(scc[w]);
    }
  }
  for (auto &ss : sccSuccs) {
    std::sort(ss.begin(), ss.end());
    ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  }

  rt.sccOwnBits.assign(sccCount, std::vector<uint64_t>(rt.words, 0));
  for (NodeId v = 0; v < n; ++v)
    for (LabelId id : rt.own[v])
      rt.sccOwnBits[scc[v]][static_cast<size_t>(id) / 64] |=
          1ull << (static_cast<size_t>(id) % 64);

  rt.sccReach.assign(sccCount, std::vector<uint64_t>(rt.words, 0));
  for (int s = 0; s < sccCount; ++s) {
    auto &bits = rt.sccReach[s];
    for (int t : sccSuccs[s]) {
      // t < s in Tarjan emission order (reverse topological)
      for (size_t w = 0; w < rt.words; ++w)
        bits[w] |= rt.sccReach[t][w] | rt.sccOwnBits[t][w];
    }
    if (cyclic[s])
      for (size_t w = 0; w < rt.words; ++w) bits[w] |= rt.sccOwnBits[s][w];
  }

  rt.sccOf.assign(n, 0);
  rt.counts.assign(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    rt.sccOf[v] = scc[v];
    int c = 0;
    for (uint64_t w : rt.sccReach[scc[v]]) c += __builtin_popcountll(w);
    rt.counts[v] = c;
  }
  return rt;
}

} // namespace hfl
