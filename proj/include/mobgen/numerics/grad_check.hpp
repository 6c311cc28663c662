#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

/// Compares reverse-mode gradients of a scalar function against central
/// differences. Returns max over components of
///   |analytic - numeric| / max(1, |analytic|).
/// eps must lie in [1e-7, 1e-3]; a non-finite f(x) is an error.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps = 1e-5);

struct GradCheckOptions {
  double eps = 1e-5;
  /// Check at most this many randomly chosen components per leaf (0 = all).
  std::size_t max_components_per_leaf = 0;
  std::uint64_t seed = 0;
};

/// Same check over several leaves at once (typically a block's parameters
/// and its input). `f` must rebuild the graph from the leaves' current values;
/// leaves are perturbed in place and restored.
double grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& leaves,
                  const GradCheckOptions& options = {});

}  // namespace mobgen::numerics
