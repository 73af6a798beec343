#pragma once

#include <span>
#include <vector>

namespace hfl {

// Exact one-sided Mann-Whitney U test by permutation enumeration: the
// p-value is the fraction of label assignments whose U statistic is at
// least the observed one, where U counts pairs with a[i] < b[j] (ties
// count half). Small samples only; larger inputs fall back to the normal
// approximation with tie correction.
struct MannWhitneyResult {
  double u = 0;
  double pOneSided = 1.0; // P(a tends smaller than b) significance
};

MannWhitneyResult mannWhitneyOneSided(std::span<const double> a,
                                      std::span<const double> b);

double medianOf(std::vector<double> xs);

} // namespace hfl
