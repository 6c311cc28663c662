#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::metrics {

/// Row-major [rows x cols] feature table, one row per image.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

enum class ExtractorKind {
  kRandomConv,  // fixed seeded random conv net, 64 features
  kGray8,       // grayscale, area-averaged to 8x8
};

/// Maps images [B,3,H,W] in [-1,1] to feature vectors for Frechet distance.
/// Deterministic given the kind and seed. Values are only comparable between
/// runs that use the same extractor.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(ExtractorKind kind = ExtractorKind::kRandomConv, std::uint64_t seed = 0);

  FeatureMatrix extract(const numerics::Tensor& images) const;
  std::size_t feature_dim() const { return 64; }
  ExtractorKind kind() const { return kind_; }

 private:
  ExtractorKind kind_;
  std::vector<numerics::Tensor> weights_;
  std::vector<numerics::Tensor> biases_;
};

}  // namespace mobgen::metrics
