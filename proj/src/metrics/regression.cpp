#include "mobgen/metrics/regression.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mobgen::metrics {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw std::invalid_argument("empty input");
}

}  // namespace

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_sizes(predicted, actual);
  double ss = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(actual.size()));
}

std::optional<double> r_squared(std::span<const double> predicted, std::span<const double> actual) {
  check_sizes(predicted, actual);
  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

RegressionScores regression_scores(std::span<const double> predicted, std::span<const double> actual,
                                   std::size_t targets) {
  check_sizes(predicted, actual);
  if (targets == 0 || actual.size() % targets != 0) {
    throw std::invalid_argument("data size is not a multiple of the target count");
  }
  const std::size_t rows = actual.size() / targets;
  RegressionScores out;
  std::vector<double> p(rows), a(rows);
  double r2_total = 0.0;
  std::size_t r2_count = 0;
  for (std::size_t k = 0; k < targets; ++k) {
    for (std::size_t r = 0; r < rows; ++r) {
      p[r] = predicted[r * targets + k];
      a[r] = actual[r * targets + k];
    }
    out.rmse_per_target.push_back(rmse(p, a));
    out.rmse_mean += out.rmse_per_target.back();
    out.r2_per_target.push_back(r_squared(p, a));
    if (out.r2_per_target.back()) {
      r2_total += *out.r2_per_target.back();
      ++r2_count;
    }
  }
  out.rmse_mean /= static_cast<double>(targets);
  if (r2_count > 0) out.r2_mean = r2_total / static_cast<double>(r2_count);
  return out;
}

}  // namespace mobgen::metrics
