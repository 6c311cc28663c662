#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace mobgen::metrics {

struct DtwResult {
  double cost = 0.0;
  /// Aligned index pairs from (0,0) to (n-1,m-1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

/// Dynamic time warping between two sequences of `dim`-vectors stored
/// row-major. Local cost is the L1 distance; steps (1,0), (0,1), (1,1).
DtwResult dtw_align(std::span<const double> a, std::span<const double> b, std::size_t dim = 1);

inline double dtw(std::span<const double> a, std::span<const double> b, std::size_t dim = 1) {
  return dtw_align(a, b, dim).cost;
}

}  // namespace mobgen::metrics
