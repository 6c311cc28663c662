#include "mobgen/spatialgen/train.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mobgen/errors.hpp"
#include "mobgen/numerics/ops.hpp"

namespace mobgen::spatialgen {

namespace ops = numerics;
using numerics::Rng;

namespace {

constexpr const char* kCheckpointKind = "mobgen.gan";

double mean_of(const Tensor& t) {
  double s = 0.0;
  for (double v : t.values()) s += v;
  return s / static_cast<double>(t.numel());
}

Tensor gather_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
  const std::size_t per = t.numel() / t.dim(0);
  std::vector<double> out;
  out.reserve(rows.size() * per);
  auto v = t.values();
  for (std::size_t r : rows) out.insert(out.end(), v.begin() + r * per, v.begin() + (r + 1) * per);
  numerics::Shape shape = t.shape();
  shape[0] = rows.size();
  return Tensor(shape, std::move(out));
}

void require_finite(double value, const char* what, std::size_t iter) {
  if (!std::isfinite(value)) {
    throw numerics::NumericError(std::string("non-finite ") + what + " at iteration " + std::to_string(iter));
  }
}

// Parameter norms for the abort diagnostic.
std::string param_norms(const numerics::ParameterSet& params) {
  std::string out;
  for (const auto& [name, t] : params.items()) {
    double ss = 0.0;
    for (double v : t.values()) ss += v * v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "=%.4g ", std::sqrt(ss));
    out += name + buf;
  }
  return out;
}

std::string iteration_name(std::size_t iter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06zu.png", iter);
  return buf;
}

}  // namespace

Condition ConditionStats::standardize(const Condition& raw) const {
  Condition out{};
  for (std::size_t k = 0; k < kConditionDim; ++k) out[k] = sigma[k] > 0.0 ? (raw[k] - mu[k]) / sigma[k] : raw[k];
  return out;
}

Tensor ConditionStats::standardize(const std::vector<Condition>& raw) const {
  std::vector<double> v;
  v.reserve(raw.size() * kConditionDim);
  for (const auto& c : raw) {
    const Condition s = standardize(c);
    v.insert(v.end(), s.begin(), s.end());
  }
  return Tensor({raw.size(), kConditionDim}, std::move(v));
}

ConditionStats fit_condition_stats(const std::vector<Condition>& conditions) {
  if (conditions.empty()) throw DataError("no conditions to fit statistics on");
  ConditionStats s;
  const double n = static_cast<double>(conditions.size());
  for (std::size_t k = 0; k < kConditionDim; ++k) {
    double mu = 0.0;
    for (const auto& c : conditions) mu += c[k];
    mu /= n;
    double var = 0.0;
    for (const auto& c : conditions) var += (c[k] - mu) * (c[k] - mu);
    const double sd = std::sqrt(var / n);
    s.mu[k] = mu;
    s.sigma[k] = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? sd : 0.0;
  }
  return s;
}

nlohmann::json to_json(const ConditionStats& stats) { return {{"mu", stats.mu}, {"sigma", stats.sigma}}; }

ConditionStats condition_stats_from_json(const nlohmann::json& j) {
  try {
    ConditionStats s;
    s.mu = j.at("mu").get<Condition>();
    s.sigma = j.at("sigma").get<Condition>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("malformed condition statistics: ") + e.what());
  }
}

nlohmann::json to_json(const GanLogEntry& e) {
  return {{"iter", e.iter},       {"loss_D", e.loss_d},        {"loss_G", e.loss_g},
          {"penalty_D", e.d_penalty}, {"penalty_path", e.path_penalty}, {"path_length_mean", e.path_length_mean},
          {"D_real", e.d_real},   {"D_fake", e.d_fake},        {"wall_time", e.wall_time}};
}

GanTrainer::GanTrainer(GanModel& model, const Tensor& images, const Tensor& conditions, std::uint64_t seed)
    : model_(model),
      images_(images.detach()),
      conditions_(conditions.detach()),
      g_opt_(model.g_params().tensors(), {model.config().lr_g, model.config().beta1, model.config().beta2, 1e-8}),
      d_opt_(model.d_params().tensors(), {model.config().lr_d, model.config().beta1, model.config().beta2, 1e-8}),
      path_length_(model.config().path_length_weight, model.config().path_length_decay),
      shuffle_rng_(Rng::substream(seed, "shuffle")),
      latent_rng_(Rng::substream(seed, "latent")),
      noise_rng_(Rng::substream(seed, "noise")),
      penalty_rng_(Rng::substream(seed, "penalty")) {
  if (images_.rank() != 4 || images_.dim(0) == 0) throw DataError("GAN training needs a non-empty image batch");
  if (conditions_.rank() != 2 || conditions_.dim(0) != images_.dim(0)) {
    throw DataError("image and condition counts differ: " + numerics::shape_str(images_.shape()) + " vs " +
                    numerics::shape_str(conditions_.shape()));
  }
}

std::vector<std::size_t> GanTrainer::next_batch() {
  std::vector<std::size_t> batch;
  while (batch.size() < model_.config().batch) {
    if (cursor_ == order_.size()) {
      order_ = shuffle_rng_.permutation(images_.dim(0));
      cursor_ = 0;
    }
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

GanTrainer::DStep GanTrainer::d_step() {
  const GanConfig& cfg = model_.config();
  batch_ = next_batch();
  const Tensor real = gather_rows(images_, batch_);
  const Tensor cond = gather_rows(conditions_, batch_);
  model_.g_params().zero_grad();
  model_.d_params().zero_grad();

  Tensor fake;
  {
    numerics::NoGradGuard no_grad;
    fake = model_.generate(cond, sample_latent(cond.dim(0), cfg.latent_dim, latent_rng_), noise_rng_);
  }
  model_.g_params().set_requires_grad(false);
  const Discriminator& disc = model_.discriminator();
  const Tensor d_real = disc(real, cond);
  const Tensor d_fake = disc(fake, cond);
  Tensor loss = discriminator_loss(d_real, d_fake);
  DStep out{loss.item(), 0.0, mean_of(d_real), mean_of(d_fake)};
  const ScoreFn score = [&](const Tensor& images) { return disc.score(images, cond); };
  Tensor penalty;
  if (cfg.regularizer == Regularizer::kR1 && regularize_now(step_, cfg.r1_interval)) {
    penalty = r1_penalty(score, real, cfg.r1_gamma);
  } else if (cfg.regularizer == Regularizer::kWganGp) {
    penalty = gradient_penalty(score, real, fake, cfg.gp_lambda, penalty_rng_);
  }
  if (penalty.defined()) {
    out.penalty = penalty.item();
    loss = ops::add(loss, penalty);
  }
  numerics::backward(loss);
  model_.g_params().set_requires_grad(true);
  d_opt_.step();
  return out;
}

GanTrainer::GStep GanTrainer::g_step() {
  const GanConfig& cfg = model_.config();
  const Tensor cond = gather_rows(conditions_, batch_);
  model_.g_params().zero_grad();
  model_.d_params().zero_grad();
  model_.d_params().set_requires_grad(false);
  const Tensor w = model_.encode(cond, sample_latent(cond.dim(0), cfg.latent_dim, latent_rng_));
  const Tensor fake = model_.generator()(w, noise_rng_);
  Tensor loss = generator_loss(model_.discriminator()(fake, cond));
  GStep out{loss.item(), 0.0};
  if (cfg.path_length && regularize_now(step_, cfg.path_length_interval)) {
    const Tensor penalty = path_length_(fake, w, penalty_rng_);
    out.path_penalty = penalty.item();
    loss = ops::add(loss, penalty);
  }
  numerics::backward(loss);
  model_.d_params().set_requires_grad(true);
  g_opt_.step();
  return out;
}

GanLogEntry GanTrainer::step() {
  GanLogEntry e;
  e.iter = step_;
  const DStep d = d_step();
  require_finite(d.loss + d.penalty, "discriminator loss", step_);
  const GStep g = g_step();
  require_finite(g.loss + g.path_penalty, "generator loss", step_);
  e.loss_d = d.loss;
  e.d_penalty = d.penalty;
  e.d_real = d.d_real;
  e.d_fake = d.d_fake;
  e.loss_g = g.loss;
  e.path_penalty = g.path_penalty;
  e.path_length_mean = path_length_.running_mean();
  ++step_;
  return e;
}

Rgb8Image sample_grid(const GanModel& model, const Tensor& standardized_conditions, std::uint64_t seed) {
  numerics::NoGradGuard no_grad;
  Rng z_rng = Rng::substream(seed, "samples/latent");
  Rng noise = Rng::substream(seed, "samples/noise");
  const std::size_t n = standardized_conditions.dim(0);
  const Tensor images = model.generate(standardized_conditions, sample_latent(n, model.config().latent_dim, z_rng), noise);
  std::size_t columns = 1;
  while (columns * columns < n) ++columns;
  return make_grid(images, columns);
}

numerics::Checkpoint gan_checkpoint(const GanModel& model, const ConditionStats& stats, std::size_t iterations,
                                    double path_length_mean) {
  numerics::Checkpoint ckpt;
  nlohmann::json meta{{"kind", kCheckpointKind},
                      {"config", to_json(model.config())},
                      {"condition_stats", to_json(stats)},
                      {"iterations", iterations},
                      {"path_length_mean", path_length_mean}};
  ckpt.metadata = meta.dump();
  for (const auto& item : model.g_params().items()) ckpt.tensors.push_back(item);
  for (const auto& item : model.d_params().items()) ckpt.tensors.push_back(item);
  return ckpt;
}

LoadedGan load_gan(const numerics::Checkpoint& checkpoint) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(checkpoint.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  if (meta.value("kind", "") != kCheckpointKind) throw CompatError("not a GAN checkpoint");
  GanConfig cfg = gan_config_from_json(meta.at("config"));
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CompatError(e.what());
  }
  LoadedGan out{GanModel(cfg, 0), condition_stats_from_json(meta.at("condition_stats")),
                meta.value("iterations", std::size_t{0})};
  const std::size_t ng = out.model.g_params().items().size();
  if (checkpoint.tensors.size() != ng + out.model.d_params().items().size()) {
    throw CompatError("GAN checkpoint holds " + std::to_string(checkpoint.tensors.size()) +
                      " tensors, config expects " +
                      std::to_string(ng + out.model.d_params().items().size()));
  }
  out.model.g_params().assign({checkpoint.tensors.begin(), checkpoint.tensors.begin() + static_cast<long>(ng)});
  out.model.d_params().assign({checkpoint.tensors.begin() + static_cast<long>(ng), checkpoint.tensors.end()});
  return out;
}

Tensor generate_images(const GanModel& model, const ConditionStats& stats, const std::vector<Condition>& raw,
                       std::uint64_t seed) {
  numerics::NoGradGuard no_grad;
  Rng z_rng = Rng::substream(seed, "generate/latent");
  Rng noise = Rng::substream(seed, "generate/noise");
  return model.generate(stats.standardize(raw), sample_latent(raw.size(), model.config().latent_dim, z_rng), noise);
}

GanTrainResult train_gan(const ImageDataset& data, const GanConfig& config, const GanTrainOptions& options) {
  config.validate();
  if (data.conditions.empty()) throw DataError("GAN training set is empty");
  if (data.images.dim(2) != config.image_size || data.images.dim(3) != config.image_size) {
    throw DataError("images are " + std::to_string(data.images.dim(2)) + "x" + std::to_string(data.images.dim(3)) +
                    ", config expects " + std::to_string(config.image_size));
  }
  GanTrainResult result{GanModel(config, config.seed),
                        options.condition_stats.value_or(fit_condition_stats(data.conditions)), {}};
  const Tensor conditions = result.stats.standardize(data.conditions);

  std::vector<Condition> grid_raw;
  for (std::size_t i = 0; i < config.sample_count; ++i) grid_raw.push_back(data.conditions[i % data.conditions.size()]);
  const Tensor grid_conditions = result.stats.standardize(grid_raw);

  std::ofstream log_file;
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir / "samples", ec);
    if (ec) throw IoError("cannot create " + options.out_dir->string() + ": " + ec.message());
    log_file.open(*options.out_dir / "log.jsonl", std::ios::binary);
    if (!log_file) throw IoError("cannot write " + (*options.out_dir / "log.jsonl").string());
  }
  auto write_samples = [&](std::size_t iter) {
    if (options.out_dir) write_png(*options.out_dir / "samples" / iteration_name(iter), sample_grid(result.model, grid_conditions, config.seed));
  };

  GanTrainer trainer(result.model, data.images, conditions, config.seed);
  numerics::Checkpoint last_good = gan_checkpoint(result.model, result.stats, 0, 0.0);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t it = 0; it < config.iterations; ++it) {
    GanLogEntry entry;
    try {
      entry = trainer.step();
    } catch (const numerics::NumericError& e) {
      std::string where;
      if (options.out_dir) {
        const auto path = *options.out_dir / "gan.last_good.ckpt";
        numerics::save_checkpoint(path, last_good);
        where = "; last good checkpoint written to " + path.string();
      }
      spdlog::error("GAN training diverged at iteration {}: {}", it, e.what());
      throw numerics::NumericError("GAN training diverged at iteration " + std::to_string(it) + ": " + e.what() +
                                   where + "; generator norms: " + param_norms(result.model.g_params()) +
                                   "; discriminator norms: " + param_norms(result.model.d_params()));
    }
    entry.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (log_file) log_file << to_json(entry).dump() << '\n';
    if (options.on_log) options.on_log(entry);
    result.log.push_back(entry);
    const std::size_t done = it + 1;
    if (config.sample_every && done % config.sample_every == 0) write_samples(done);
    if (config.checkpoint_every && done % config.checkpoint_every == 0) {
      last_good = gan_checkpoint(result.model, result.stats, done, trainer.path_length().running_mean());
      if (options.out_dir) numerics::save_checkpoint(*options.out_dir / "gan.ckpt", last_good);
    }
    if (done % 100 == 0) {
      spdlog::info("gan iter {} loss_D {:.4f} loss_G {:.4f} D(real) {:.3f} D(fake) {:.3f}", done, entry.loss_d,
                   entry.loss_g, entry.d_real, entry.d_fake);
    }
  }
  if (options.out_dir) {
    numerics::save_checkpoint(*options.out_dir / "gan.ckpt",
                              gan_checkpoint(result.model, result.stats, config.iterations,
                                             trainer.path_length().running_mean()));
  }
  return result;
}

}  // namespace mobgen::spatialgen
