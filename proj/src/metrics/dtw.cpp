#include "mobgen/metrics/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mobgen::metrics {

DtwResult dtw_align(std::span<const double> a, std::span<const double> b, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("dtw: dim must be positive");
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw: empty sequence");
  if (a.size() % dim != 0 || b.size() % dim != 0) throw std::invalid_argument("dtw: length not a multiple of dim");
  const std::size_t n = a.size() / dim, m = b.size() / dim;

  auto local = [&](std::size_t i, std::size_t j) {
    double c = 0.0;
    for (std::size_t d = 0; d < dim; ++d) c += std::abs(a[i * dim + d] - b[j * dim + d]);
    return c;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // acc is (n+1) x (m+1) with a padded infinite border.
  std::vector<double> acc((n + 1) * (m + 1), kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      at(i, j) = local(i - 1, j - 1) + std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
    }
  }

  DtwResult out;
  out.cost = at(n, m);
  std::size_t i = n, j = m;
  while (true) {
    out.path.emplace_back(i - 1, j - 1);
    if (i == 1 && j == 1) break;
    // Prefer the diagonal on ties so the path is deterministic.
    const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

}  // namespace mobgen::metrics
