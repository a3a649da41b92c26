#include "womble/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace womble {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample SD needs at least two values");
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0 && p <= 1)) throw std::domain_error("quantile probability outside [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double batch_means_se(const std::vector<double>& v, int num_batches) {
  const std::size_t len = v.size() / static_cast<std::size_t>(num_batches);
  if (num_batches < 2 || len == 0) throw std::invalid_argument("too few values for batch means");
  std::vector<double> means(num_batches);
  for (int b = 0; b < num_batches; ++b) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(b * len);
    means[b] = std::accumulate(first, first + static_cast<std::ptrdiff_t>(len), 0.0) / static_cast<double>(len);
  }
  return sample_sd(means) / std::sqrt(static_cast<double>(num_batches));
}

}  // namespace womble
