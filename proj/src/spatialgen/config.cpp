#include "mobgen/spatialgen/config.hpp"

#include <stdexcept>

#include "mobgen/errors.hpp"

namespace mobgen::spatialgen {

std::string to_string(Regularizer r) { return r == Regularizer::kR1 ? "r1" : "wgan_gp"; }

Regularizer parse_regularizer(const std::string& text) {
  if (text == "r1") return Regularizer::kR1;
  if (text == "wgan_gp") return Regularizer::kWganGp;
  throw std::invalid_argument("unknown regularizer '" + text + "' (expected r1 or wgan_gp)");
}

std::size_t GanConfig::block_count() const {
  std::size_t n = 0;
  for (std::size_t s = 4; s < image_size; s *= 2) ++n;
  return n;
}

std::size_t GanConfig::block_channels(std::size_t block) const {
  return std::max<std::size_t>(8, base_channels >> (block / 2));
}

void GanConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid GAN config: ") + what);
  };
  require(latent_dim > 0, "latent_dim must be positive");
  std::size_t s = image_size;
  while (s > 4 && s % 2 == 0) s /= 2;
  require(image_size >= 8 && s == 4, "image_size must be 4 * 2^k with k >= 1");
  require(condition_dim == 5, "condition_dim must be 5");
  require(base_channels > 0 && fusion_dim > 0, "channel counts must be positive");
  require(lr_g > 0 && lr_d > 0, "learning rates must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "Adam betas must lie in [0, 1)");
  require(batch > 0, "batch must be positive");
  require(r1_interval > 0 && path_length_interval > 0, "regularizer intervals must be positive");
  require(gp_lambda >= 0 && r1_gamma >= 0 && path_length_weight >= 0, "regularizer weights must be non-negative");
  require(path_length_decay >= 0 && path_length_decay < 1, "path_length_decay must lie in [0, 1)");
  require(sample_count > 0, "sample_count must be positive");
}

nlohmann::json to_json(const GanConfig& c) {
  return {{"latent_dim", c.latent_dim},
          {"image_size", c.image_size},
          {"condition_dim", c.condition_dim},
          {"base_channels", c.base_channels},
          {"fusion_dim", c.fusion_dim},
          {"lr_g", c.lr_g},
          {"lr_d", c.lr_d},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"batch", c.batch},
          {"iterations", c.iterations},
          {"regularizer", to_string(c.regularizer)},
          {"gp_lambda", c.gp_lambda},
          {"r1_gamma", c.r1_gamma},
          {"r1_interval", c.r1_interval},
          {"path_length", c.path_length},
          {"path_length_weight", c.path_length_weight},
          {"path_length_interval", c.path_length_interval},
          {"path_length_decay", c.path_length_decay},
          {"seed", c.seed},
          {"sample_every", c.sample_every},
          {"checkpoint_every", c.checkpoint_every},
          {"sample_count", c.sample_count}};
}

GanConfig gan_config_from_json(const nlohmann::json& j) {
  GanConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("latent_dim", c.latent_dim);
    get("image_size", c.image_size);
    get("condition_dim", c.condition_dim);
    get("base_channels", c.base_channels);
    get("fusion_dim", c.fusion_dim);
    get("lr_g", c.lr_g);
    get("lr_d", c.lr_d);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("batch", c.batch);
    get("iterations", c.iterations);
    if (j.contains("regularizer")) c.regularizer = parse_regularizer(j.at("regularizer").get<std::string>());
    get("gp_lambda", c.gp_lambda);
    get("r1_gamma", c.r1_gamma);
    get("r1_interval", c.r1_interval);
    get("path_length", c.path_length);
    get("path_length_weight", c.path_length_weight);
    get("path_length_interval", c.path_length_interval);
    get("path_length_decay", c.path_length_decay);
    get("seed", c.seed);
    get("sample_every", c.sample_every);
    get("checkpoint_every", c.checkpoint_every);
    get("sample_count", c.sample_count);
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("malformed GAN config: ") + e.what());
  }
  return c;
}

}  // namespace mobgen::spatialgen
