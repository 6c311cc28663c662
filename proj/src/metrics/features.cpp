#include "mobgen/metrics/features.hpp"

#include <cmath>

#include "mobgen/numerics/nn.hpp"
#include "mobgen/numerics/ops.hpp"
#include "mobgen/numerics/rng.hpp"

namespace mobgen::metrics {

using numerics::Shape;
using numerics::Tensor;

namespace {

constexpr std::size_t kChannels[] = {3, 32, 48, 64};

}  // namespace

FeatureExtractor::FeatureExtractor(ExtractorKind kind, std::uint64_t seed) : kind_(kind) {
  if (kind_ != ExtractorKind::kRandomConv) return;
  numerics::Rng rng(numerics::Rng::substream(seed, "feature_extractor"));
  for (std::size_t l = 0; l + 1 < std::size(kChannels); ++l) {
    const std::size_t in = kChannels[l], out = kChannels[l + 1];
    weights_.push_back(numerics::normal_tensor({out, in, 3, 3}, std::sqrt(2.0 / (9.0 * in)), rng));
    biases_.push_back(numerics::normal_tensor({out}, 0.1, rng));
  }
}

FeatureMatrix FeatureExtractor::extract(const Tensor& images) const {
  if (images.rank() != 4 || images.dim(1) != 3) {
    throw numerics::ShapeError("feature extractor expects [B,3,H,W], got " + numerics::shape_str(images.shape()));
  }
  numerics::NoGradGuard no_grad;
  const std::size_t batch = images.dim(0), height = images.dim(2), width = images.dim(3);
  FeatureMatrix out;
  out.rows = batch;
  out.cols = feature_dim();
  out.values.assign(out.rows * out.cols, 0.0);

  if (kind_ == ExtractorKind::kGray8) {
    if (height % 8 != 0 || width % 8 != 0) throw numerics::ShapeError("gray8 extractor needs H and W divisible by 8");
    const std::size_t bh = height / 8, bw = width / 8;
    const double norm = 1.0 / static_cast<double>(3 * bh * bw);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < height; ++y)
          for (std::size_t x = 0; x < width; ++x) {
            out.values[b * 64 + (y / bh) * 8 + x / bw] += norm * images[((b * 3 + c) * height + y) * width + x];
          }
    return out;
  }

  Tensor h = images;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = numerics::conv2d(h, weights_[l], 2, 1);
    h = numerics::relu(numerics::add(h, numerics::expand_channels(biases_[l], h.shape())));
  }
  // Global average pool to [B, 64].
  const std::size_t c = h.dim(1), hw = h.dim(2) * h.dim(3);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t k = 0; k < c; ++k) {
      double s = 0.0;
      for (std::size_t p = 0; p < hw; ++p) s += h[(b * c + k) * hw + p];
      out.values[b * c + k] = s / static_cast<double>(hw);
    }
  return out;
}

}  // namespace mobgen::metrics
