#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mobgen::metrics {

/// Root mean squared error. Lengths must match and be non-zero.
double rmse(std::span<const double> predicted, std::span<const double> actual);

/// 1 - SS_res / SS_tot. Undefined (nullopt) when `actual` is constant.
std::optional<double> r_squared(std::span<const double> predicted, std::span<const double> actual);

/// Per-target scores over row-major [rows x targets] data, plus unweighted
/// means across targets. Targets with undefined R^2 are left out of the mean.
struct RegressionScores {
  std::vector<double> rmse_per_target;
  std::vector<std::optional<double>> r2_per_target;
  double rmse_mean = 0.0;
  std::optional<double> r2_mean;
};

RegressionScores regression_scores(std::span<const double> predicted, std::span<const double> actual,
                                   std::size_t targets);

}  // namespace mobgen::metrics
