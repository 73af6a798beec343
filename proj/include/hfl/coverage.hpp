#pragma once

#include <cstdint>
#include <unordered_map>

#include "hfl/interp.hpp"
#include "hfl/ir.hpp"

namespace hfl {

// AFL-style hit-count bucketing: [1], [2], [3], [4,7], [8,15], [16,31],
// [32,127], [128,inf).
int bucketOf(uint32_t hits);

// Edge coverage as a monotone join-semilattice: per edge, a bitmask of
// buckets ever seen. Merging maps in any order yields the same result.
class CoverageMap {
public:
  bool hasEdge(EdgeKey e) const { return bits.count(e) != 0; }

  bool hasPair(EdgeKey e, int bucket) const {
    auto it = bits.find(e);
    return it != bits.end() && (it->second >> bucket & 1);
  }

  // Returns true when the (edge, bucket) pair was new.
  bool add(EdgeKey e, int bucket) {
    uint8_t &m = bits[e];
    uint8_t bit = static_cast<uint8_t>(1u << bucket);
    if (m & bit) return false;
    m |= bit;
    ++pairs_;
    return true;
  }

  // Number of pairs a trace would add without mutating the map.
  int noveltyOf(const ExecTrace &t) const;
  // Record a trace; returns the number of new pairs.
  int observe(const ExecTrace &t);

  void merge(const CoverageMap &o);

  uint64_t edgeCount() const { return bits.size(); }
  uint64_t pairCount() const { return pairs_; }

  bool operator==(const CoverageMap &o) const { return bits == o.bits; }

private:
  std::unordered_map<EdgeKey, uint8_t> bits;
  uint64_t pairs_ = 0;
};

} // namespace hfl
