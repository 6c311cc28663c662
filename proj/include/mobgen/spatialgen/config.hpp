#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace mobgen::spatialgen {

enum class Regularizer { kWganGp, kR1 };

std::string to_string(Regularizer r);
/// "wgan_gp" or "r1"; invalid_argument otherwise.
Regularizer parse_regularizer(const std::string& text);

struct GanConfig {
  std::size_t latent_dim = 512;
  std::size_t image_size = 32;  // 4 * 2^k, k >= 1
  std::size_t condition_dim = 5;
  /// Generator channels at 8x8; halved every second block, never below 8.
  std::size_t base_channels = 32;
  std::size_t fusion_dim = 256;
  double lr_g = 8e-5;
  double lr_d = 3e-5;
  double beta1 = 0.0;
  double beta2 = 0.99;
  std::size_t batch = 16;
  std::size_t iterations = 50000;
  Regularizer regularizer = Regularizer::kR1;
  double gp_lambda = 10.0;
  double r1_gamma = 10.0;
  std::size_t r1_interval = 16;
  bool path_length = true;
  double path_length_weight = 2.0;
  std::size_t path_length_interval = 8;
  double path_length_decay = 0.99;
  std::uint64_t seed = 0;
  /// Sample grid / checkpoint cadence in iterations (0 disables).
  std::size_t sample_every = 500;
  std::size_t checkpoint_every = 500;
  std::size_t sample_count = 16;

  /// invalid_argument naming the offending field.
  void validate() const;
  /// Output channels of generator block i (block 0 runs at 8x8).
  std::size_t block_channels(std::size_t block) const;
  /// Number of generator upsampling blocks (4x4 up to image_size).
  std::size_t block_count() const;
};

nlohmann::json to_json(const GanConfig& config);
/// Missing keys keep their defaults. CompatError on wrong types.
GanConfig gan_config_from_json(const nlohmann::json& j);

}  // namespace mobgen::spatialgen
