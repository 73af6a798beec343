#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "hfl/labels.hpp"
#include "hfl/ir.hpp"

namespace hfl {

// Interprocedural CFG over (function, block) nodes. Successors include
// intra-function terminator targets, call edges into callee entries, and
// return edges from callee exit blocks back to the calling block — the
// exact edges the interpreter records, so every dynamic edge is present.
struct InterCfg {
  const Program *prog = nullptr;
  std::vector<std::vector<NodeId>> succs;
  // icall site (fn, block, instr) -> resolved callee function indices.
  std::map<std::tuple<int, int, int>, std::vector<int>> icallTargets;

  bool hasEdge(NodeId a, NodeId b) const;
};

// Builds the graph, resolving indirect calls by iterative propagation of
// table-index value sets through constants, conversions, parameters and
// return values; any input-derived or arithmetic index conservatively
// expands to the whole function table.
InterCfg buildInterCfg(const Program &p);

// Per-node forward reachability over live labels. A node's reach set holds
// the labels hosted in nodes reachable via at least one edge, so a node on
// a cycle reaches its own labels while a straight-line node does not.
class ReachTable {
public:
  int reachCount(NodeId n) const { return counts[n]; }
  // Labels hosted in the node itself (live only).
  const std::vector<LabelId> &ownLabels(NodeId n) const { return own[n]; }
  std::vector<LabelId> reachSet(NodeId n) const;
  // |reach ∪ own|: the label potential behind a branch arm landing on n.
  int potential(NodeId n) const;

  std::vector<int> counts;
  std::vector<std::vector<LabelId>> own;
  // Bitset words per SCC; nodes map to their SCC.
  std::vector<int> sccOf;
  std::vector<std::vector<uint64_t>> sccReach;
  std::vector<std::vector<uint64_t>> sccOwnBits;
  size_t words = 0;
};

ReachTable computeReach(const InterCfg &cfg, const LabelSet &ls);

} // namespace hfl
