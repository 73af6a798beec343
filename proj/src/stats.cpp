#include "hfl/stats.hpp"

#include <algorithm>
#include <cmath>

namespace hfl {

namespace {

double uStatistic(std::span<const double> a, std::span<const double> b) {
  double u = 0;
  for (double x : a)
    for (double y : b) {
      if (x < y) u += 1;
      else if (x == y) u += 0.5;
    }
  return u;
}

} // namespace

MannWhitneyResult mannWhitneyOneSided(std::span<const double> a,
                                      std::span<const double> b) {
  MannWhitneyResult res;
  size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return res;
  res.u = uStatistic(a, b);

  // Exact permutation when the split count is manageable.
  double logC = std::lgamma(double(n + m + 1)) - std::lgamma(double(n + 1)) -
                std::lgamma(double(m + 1));
  if (logC <= std::log(250000.0)) {
    std::vector<double> pool(a.begin(), a.end());
    pool.insert(pool.end(), b.begin(), b.end());
    std::vector<int> pick(n + m, 0);
    std::fill(pick.begin(), pick.begin() + n, 1);
    std::sort(pick.begin(), pick.end()); // lexicographically smallest
    uint64_t total = 0, atLeast = 0;
    std::vector<double> pa(n), pb(m);
    do {
      size_t ia = 0, ib = 0;
      for (size_t i = 0; i < pool.size(); ++i)
        (pick[i] ? pa[ia++] : pb[ib++]) = pool[i];
      double u = uStatistic(pa, pb);
      ++total;
      if (u >= res.u - 1e-12) ++atLeast;
    } while (std::next_permutation(pick.begin(), pick.end()));
    res.pOneSided = double(atLeast) / double(total);
    return res;
  }

  // Normal approximation with tie correction.
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  std::sort(pool.begin(), pool.end());
  double tieTerm = 0;
  for (size_t i = 0; i < pool.size();) {
    size_t j = i;
    while (j < pool.size() && pool[j] == pool[i]) ++j;
    double t = double(j - i);
    tieTerm += t * t * t - t;
    i = j;
  }
  double N = double(n + m);
  double mu = double(n) * double(m) / 2.0;
  double sigma2 =
      double(n) * double(m) / 12.0 * (N + 1.0 - tieTerm / (N * (N - 1.0)));
  if (sigma2 <= 0) return res;
  double z = (res.u - mu) / std::sqrt(sigma2);
  res.pOneSided = 0.5 * std::erfc(z / std::sqrt(2.0));
  return res;
}

double medianOf(std::vector<double> xs) {
  if (xs.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace hfl
