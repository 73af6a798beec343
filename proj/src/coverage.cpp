#include "hfl/coverage.hpp"

namespace hfl {

int bucketOf(uint32_t hits) {
  if (hits == 0) throw Error("bucketOf: edge was not executed");
  if (hits == 1) return 0;
  if (hits == 2) return 1;
  if (hits == 3) return 2;
  if (hits <= 7) return 3;
  if (hits <= 15) return 4;
  if (hits <= 31) return 5;
  if (hits <= 127) return 6;
  return 7;
}

int CoverageMap::noveltyOf(const ExecTrace &t) const {
  int fresh = 0;
  for (auto &[e, n] : t.edgeHits)
    if (!hasPair(e, bucketOf(n))) ++fresh;
  return fresh;
}

int CoverageMap::observe(const ExecTrace &t) {
  int fresh = 0;
  for (auto &[e, n] : t.edgeHits)
    if (add(e, bucketOf(n))) ++fresh;
  return fresh;
}

void CoverageMap::merge(const CoverageMap &o) {
  for (auto &[e, m] : o.bits) {
    uint8_t &mine = bits[e];
    uint8_t fresh = static_cast<uint8_t>(m & ~mine);
    mine |= m;
    pairs_ += __builtin_popcount(fresh);
  }
}

} // namespace hfl
