#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update on raw arrays. `step` is 1-based.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::size_t step, const AdamConfig& config);

class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  /// Applies one update from each parameter's accumulated .grad(). Parameters
  /// without a gradient are treated as having a zero gradient.
  void step();
  void zero_grad();

  std::size_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t step_ = 0;
};

/// Global L2 norm of the accumulated gradients.
double grad_norm(const std::vector<Tensor>& params);

/// Rescales accumulated gradients so their global norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(const std::vector<Tensor>& params, double max_norm);

}  // namespace mobgen::numerics
