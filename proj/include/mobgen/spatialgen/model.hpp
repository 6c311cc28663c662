#pragma once

#include <vector>

#include "mobgen/numerics/nn.hpp"
#include "mobgen/spatialgen/blocks.hpp"
#include "mobgen/spatialgen/config.hpp"

namespace mobgen::spatialgen {

/// w = W2 relu(W1 [x, z] + b1) + b2, output latent_dim.
class ConditionEncoder {
 public:
  ConditionEncoder() = default;
  ConditionEncoder(numerics::ParameterSet& params, const std::string& prefix, std::size_t condition_dim,
                   std::size_t latent_dim, numerics::Rng& rng);
  /// x [B,condition_dim], z [B,latent_dim] -> w [B,latent_dim].
  Tensor operator()(const Tensor& x, const Tensor& z) const;

 private:
  std::size_t condition_dim_ = 0;
  numerics::Linear hidden_;
  numerics::Linear out_;
};

/// Learned 4x4 constant, then per block: upsample x2, 3x3 conv + bias, noise
/// injection, leaky relu, AdaIN driven by w; finally 1x1 conv to RGB and tanh.
class Generator {
 public:
  Generator() = default;
  Generator(numerics::ParameterSet& params, const std::string& prefix, const GanConfig& config, numerics::Rng& rng);
  /// w [B,latent_dim] -> images [B,3,S,S] in [-1,1]. Per-pixel noise comes from `noise`.
  Tensor operator()(const Tensor& w, numerics::Rng& noise) const;

  struct Block {
    Tensor conv_weight;
    Tensor conv_bias;
    Tensor noise_gain;
    numerics::Linear style;  // w -> [gamma, beta]
  };
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  Tensor constant_;
  std::vector<Block> blocks_;
  Tensor rgb_weight_;
  Tensor rgb_bias_;
};

/// Score s = W_D lrelu(f_img(I) + f_tab(x)) + b_D; probability = sigmoid(s).
/// f_img is a stride-2 conv stack down to 4x4 with minibatch-std appended
/// before flattening; f_tab is a two-layer MLP.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(numerics::ParameterSet& params, const std::string& prefix, const GanConfig& config,
                numerics::Rng& rng);
  /// Pre-sigmoid score [B,1].
  Tensor score(const Tensor& images, const Tensor& conditions) const;
  /// Probability [B,1] in (0,1).
  Tensor operator()(const Tensor& images, const Tensor& conditions) const;

  const numerics::Linear& head() const { return head_; }

 private:
  std::size_t image_size_ = 0;
  std::size_t condition_dim_ = 0;
  std::vector<std::pair<Tensor, Tensor>> convs_;  // weight, bias; first has stride 1
  numerics::Linear img_proj_;
  numerics::Linear tab_hidden_;
  numerics::Linear tab_out_;
  numerics::Linear head_;
};

/// Generator side (encoder + generator) and discriminator with separate
/// parameter sets so each optimizer only sees its own network.
class GanModel {
 public:
  GanModel(const GanConfig& config, std::uint64_t seed);
  GanModel(const GanModel&) = delete;
  GanModel& operator=(const GanModel&) = delete;
  GanModel(GanModel&&) = default;
  GanModel& operator=(GanModel&&) = default;

  const GanConfig& config() const { return config_; }
  numerics::ParameterSet& g_params() { return g_params_; }
  numerics::ParameterSet& d_params() { return d_params_; }
  const numerics::ParameterSet& g_params() const { return g_params_; }
  const numerics::ParameterSet& d_params() const { return d_params_; }
  const ConditionEncoder& encoder() const { return encoder_; }
  const Generator& generator() const { return generator_; }
  const Discriminator& discriminator() const { return discriminator_; }

  Tensor encode(const Tensor& conditions, const Tensor& z) const { return encoder_(conditions, z); }
  /// Images for standardized conditions [B,5] and latents z [B,latent_dim].
  Tensor generate(const Tensor& conditions, const Tensor& z, numerics::Rng& noise) const;

 private:
  GanConfig config_;
  numerics::ParameterSet g_params_;
  numerics::ParameterSet d_params_;
  ConditionEncoder encoder_;
  Generator generator_;
  Discriminator discriminator_;
};

/// z ~ N(0, I), [batch, latent_dim].
Tensor sample_latent(std::size_t batch, std::size_t latent_dim, numerics::Rng& rng);

}  // namespace mobgen::spatialgen
