#pragma once

#include <cstddef>
#include <span>

namespace weakpairs {

/// Pairwise (tree) summation. Error grows O(log n) instead of O(n), which
/// keeps the mixed-sign estimator sums inside the 1e-12 calibration budget
/// for n up to 1e5. The reduction tree depends only on the element count,
/// so results are bit-reproducible regardless of threading.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 32) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Sample mean via pairwise summation.
inline double pairwise_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

}  // namespace weakpairs
