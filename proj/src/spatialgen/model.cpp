#include "mobgen/spatialgen/model.hpp"

#include <cmath>

#include "mobgen/numerics/ops.hpp"

namespace mobgen::spatialgen {

namespace ops = numerics;
using numerics::Linear;
using numerics::ParameterSet;
using numerics::Rng;
using numerics::ShapeError;

namespace {

constexpr double kSlope = 0.2;

Tensor he_conv(std::size_t out, std::size_t in, std::size_t k, Rng& rng) {
  return numerics::normal_tensor({out, in, k, k}, std::sqrt(2.0 / static_cast<double>(in * k * k)), rng);
}

}  // namespace

ConditionEncoder::ConditionEncoder(ParameterSet& params, const std::string& prefix, std::size_t condition_dim,
                                   std::size_t latent_dim, Rng& rng)
    : condition_dim_(condition_dim),
      hidden_(params, prefix + ".fc1", condition_dim + latent_dim, latent_dim, rng),
      out_(params, prefix + ".fc2", latent_dim, latent_dim, rng) {}

Tensor ConditionEncoder::operator()(const Tensor& x, const Tensor& z) const {
  if (x.rank() != 2 || x.dim(1) != condition_dim_) {
    throw ShapeError("condition encoder expects [B," + std::to_string(condition_dim_) + "] conditions, got " +
                     numerics::shape_str(x.shape()));
  }
  return out_(ops::relu(hidden_(ops::concat({x, z}))));
}

Generator::Generator(ParameterSet& params, const std::string& prefix, const GanConfig& config, Rng& rng) {
  const std::size_t c0 = config.block_channels(0);
  constant_ = params.add(prefix + ".const", numerics::normal_tensor({1, c0, 4, 4}, 1.0, rng));
  std::size_t in = c0;
  for (std::size_t i = 0; i < config.block_count(); ++i) {
    const std::size_t out = config.block_channels(i);
    const std::string p = prefix + ".block" + std::to_string(i);
    Block block;
    block.conv_weight = params.add(p + ".conv.weight", he_conv(out, in, 3, rng));
    block.conv_bias = params.add(p + ".conv.bias", Tensor::zeros({out}));
    block.noise_gain = params.add(p + ".noise_gain", Tensor::zeros({out}));
    block.style = Linear(params, p + ".style", config.latent_dim, 2 * out, rng);
    // gamma starts around 1 so AdaIN begins close to plain normalization.
    Tensor style_bias = block.style.bias();
    auto bias = style_bias.mutable_values();
    for (std::size_t c = 0; c < out; ++c) bias[c] = 1.0;
    for (std::size_t c = out; c < 2 * out; ++c) bias[c] = 0.0;
    blocks_.push_back(std::move(block));
    in = out;
  }
  rgb_weight_ = params.add(prefix + ".rgb.weight", he_conv(3, in, 1, rng));
  rgb_bias_ = params.add(prefix + ".rgb.bias", Tensor::zeros({3}));
}

Tensor Generator::operator()(const Tensor& w, Rng& noise) const {
  const std::size_t b = w.dim(0);
  Tensor h = ops::broadcast_leading(ops::reshape(constant_, {constant_.numel()}), {b, constant_.numel()});
  h = ops::reshape(h, {b, constant_.dim(1), 4, 4});
  for (const Block& block : blocks_) {
    h = ops::upsample2x(h);
    h = add_channel_bias(ops::conv2d(h, block.conv_weight, 1, 1), block.conv_bias);
    h = noise_inject(h, block.noise_gain, noise);
    h = ops::leaky_relu(h, kSlope);
    const Tensor style = block.style(w);
    const std::size_t c = h.dim(1);
    h = adain(h, ops::slice(style, 0, c), ops::slice(style, c, 2 * c));
  }
  return ops::tanh(add_channel_bias(ops::conv2d(h, rgb_weight_, 1, 0), rgb_bias_));
}

Discriminator::Discriminator(ParameterSet& params, const std::string& prefix, const GanConfig& config, Rng& rng)
    : image_size_(config.image_size), condition_dim_(config.condition_dim) {
  std::size_t in = 3, size = config.image_size, i = 0;
  auto add_conv = [&](std::size_t out) {
    const std::string p = prefix + ".conv" + std::to_string(i++);
    convs_.emplace_back(params.add(p + ".weight", he_conv(out, in, 3, rng)), params.add(p + ".bias", Tensor::zeros({out})));
    in = out;
  };
  add_conv(16);
  while (size > 4) {
    add_conv(32);
    size /= 2;
  }
  img_proj_ = Linear(params, prefix + ".img_proj", (in + 1) * 16, config.fusion_dim, rng);
  tab_hidden_ = Linear(params, prefix + ".tab.fc1", config.condition_dim, config.fusion_dim, rng);
  tab_out_ = Linear(params, prefix + ".tab.fc2", config.fusion_dim, config.fusion_dim, rng);
  head_ = Linear(params, prefix + ".head", config.fusion_dim, 1, rng);
}

Tensor Discriminator::score(const Tensor& images, const Tensor& conditions) const {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != image_size_ || images.dim(3) != image_size_) {
    throw ShapeError("discriminator expects [B,3," + std::to_string(image_size_) + "," + std::to_string(image_size_) +
                     "] images, got " + numerics::shape_str(images.shape()));
  }
  if (conditions.rank() != 2 || conditions.dim(0) != images.dim(0) || conditions.dim(1) != condition_dim_) {
    throw ShapeError("discriminator conditions " + numerics::shape_str(conditions.shape()) + " do not pair with images " +
                     numerics::shape_str(images.shape()));
  }
  Tensor h = images;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const std::size_t stride = i == 0 ? 1 : 2;
    h = ops::leaky_relu(add_channel_bias(ops::conv2d(h, convs_[i].first, stride, 1), convs_[i].second), kSlope);
  }
  const Tensor f_img = img_proj_(flatten(minibatch_std(h)));
  const Tensor f_tab = tab_out_(ops::relu(tab_hidden_(conditions)));
  return head_(ops::leaky_relu(ops::add(f_img, f_tab), kSlope));
}

Tensor Discriminator::operator()(const Tensor& images, const Tensor& conditions) const {
  return ops::sigmoid(score(images, conditions));
}

GanModel::GanModel(const GanConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng g_rng = Rng::substream(seed, "init/generator");
  Rng d_rng = Rng::substream(seed, "init/discriminator");
  encoder_ = ConditionEncoder(g_params_, "enc", config_.condition_dim, config_.latent_dim, g_rng);
  generator_ = Generator(g_params_, "gen", config_, g_rng);
  discriminator_ = Discriminator(d_params_, "disc", config_, d_rng);
}

Tensor GanModel::generate(const Tensor& conditions, const Tensor& z, Rng& noise) const {
  return generator_(encoder_(conditions, z), noise);
}

Tensor sample_latent(std::size_t batch, std::size_t latent_dim, Rng& rng) {
  return Tensor({batch, latent_dim}, rng.normal_vector(batch * latent_dim));
}

}  // namespace mobgen::spatialgen
