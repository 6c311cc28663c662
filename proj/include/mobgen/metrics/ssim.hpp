#pragma once

#include <cstddef>
#include <span>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::metrics {

struct SsimOptions {
  std::size_t window = 8;        // uniform window, stride == window
  double dynamic_range = 2.0;    // images in [-1, 1]
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over non-overlapping windows and channels of two [C,H,W] images
/// (flat row-major). Windows use population statistics. Trailing rows or
/// columns that do not fill a window are ignored.
double ssim(std::span<const double> a, std::span<const double> b, std::size_t channels, std::size_t height,
            std::size_t width, const SsimOptions& options = {});

/// SSIM between image i of batch `a` and image j of batch `b` ([B,C,H,W]).
double ssim(const numerics::Tensor& a, std::size_t i, const numerics::Tensor& b, std::size_t j,
            const SsimOptions& options = {});

/// For every image in `generated`, the SSIM of its best match in `reference`.
std::vector<double> best_match_ssim(const numerics::Tensor& generated, const numerics::Tensor& reference,
                                    const SsimOptions& options = {});

}  // namespace mobgen::metrics
