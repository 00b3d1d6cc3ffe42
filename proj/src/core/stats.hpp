#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace execsim {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// sample standard deviation (n - 1 denominator)
inline double stdev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

// linear-interpolation percentile (the common "type 7" rule), p in [0, 1]
inline double percentile(std::vector<double> xs, double p) {
  if (xs.empty()) throw std::invalid_argument("percentile of empty sample");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("percentile: p in [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = p * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= xs.size()) return xs.back();
  const double frac = h - static_cast<double>(lo);
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sided paired test of H1: mean(diff) > 0. Student statistic with a
// normal tail approximation — adequate at the sample sizes used here (≥ 30).
inline double paired_one_sided_pvalue(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) throw std::invalid_argument("paired test needs >= 2 pairs");
  const double m = mean(diffs);
  const double sd = stdev(diffs);
  if (sd == 0.0) return m > 0.0 ? 0.0 : 1.0;
  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  return 1.0 - normal_cdf(t);
}

// One-sided sign test of H1: P(win) > 1/2, ties dropped, with continuity
// correction on the normal approximation.
inline double sign_test_one_sided_pvalue(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  const double z = (static_cast<double>(wins) - 0.5 * n - 0.5) /
                   std::sqrt(0.25 * static_cast<double>(n));
  return 1.0 - normal_cdf(z);
}

}  // namespace execsim
