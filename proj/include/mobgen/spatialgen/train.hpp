#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"
#include "mobgen/numerics/checkpoint.hpp"
#include "mobgen/numerics/optim.hpp"
#include "mobgen/spatialgen/image_io.hpp"
#include "mobgen/spatialgen/losses.hpp"
#include "mobgen/spatialgen/model.hpp"

namespace mobgen::spatialgen {

/// Per-column standardization of the raw travel conditions.
struct ConditionStats {
  Condition mu{};
  Condition sigma{};  // 0 marks a constant column, passed through unscaled

  Condition standardize(const Condition& raw) const;
  /// [N,5] tensor of standardized rows.
  Tensor standardize(const std::vector<Condition>& raw) const;
  bool operator==(const ConditionStats&) const = default;
};

ConditionStats fit_condition_stats(const std::vector<Condition>& conditions);
nlohmann::json to_json(const ConditionStats& stats);
ConditionStats condition_stats_from_json(const nlohmann::json& j);

struct GanLogEntry {
  std::size_t iter = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double d_penalty = 0.0;     // r1 or gradient penalty, 0 on skipped steps
  double path_penalty = 0.0;  // 0 on skipped steps
  double path_length_mean = 0.0;
  double d_real = 0.0;  // mean discriminator probability on the real batch
  double d_fake = 0.0;
  double wall_time = 0.0;  // seconds since training started
};

nlohmann::json to_json(const GanLogEntry& entry);

/// Alternating D-step / G-step optimization over one paired dataset.
class GanTrainer {
 public:
  GanTrainer(GanModel& model, const Tensor& images, const Tensor& conditions, std::uint64_t seed);

  struct DStep {
    double loss = 0.0;
    double penalty = 0.0;
    double d_real = 0.0;
    double d_fake = 0.0;
  };
  struct GStep {
    double loss = 0.0;
    double path_penalty = 0.0;
  };

  /// Discriminator update on the next real batch. Generator parameters are
  /// frozen for its duration, so their gradient buffers stay empty.
  DStep d_step();
  /// Generator (and condition encoder) update with the discriminator frozen.
  GStep g_step();
  /// d_step then g_step, logged.
  GanLogEntry step();

  std::size_t steps_done() const { return step_; }
  PathLengthRegularizer& path_length() { return path_length_; }

 private:
  std::vector<std::size_t> next_batch();

  GanModel& model_;
  Tensor images_;
  Tensor conditions_;
  numerics::Adam g_opt_;
  numerics::Adam d_opt_;
  PathLengthRegularizer path_length_;
  numerics::Rng shuffle_rng_;
  numerics::Rng latent_rng_;
  numerics::Rng noise_rng_;
  numerics::Rng penalty_rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> batch_;
  std::size_t step_ = 0;
};

struct GanTrainOptions {
  /// When set: log.jsonl, samples/iter_NNNNNN.png and gan.ckpt are written here.
  std::optional<std::filesystem::path> out_dir;
  std::function<void(const GanLogEntry&)> on_log;
  /// Condition standardization to use instead of fitting it on the corpus,
  /// e.g. the statistics the forecaster was trained with.
  std::optional<ConditionStats> condition_stats;
};

struct GanTrainResult {
  GanModel model;
  ConditionStats stats;
  std::vector<GanLogEntry> log;
};

/// Trains from scratch. A non-finite loss aborts with NumericError after the
/// last good parameters are written to <out_dir>/gan.last_good.ckpt.
GanTrainResult train_gan(const ImageDataset& data, const GanConfig& config, const GanTrainOptions& options = {});

/// Fixed (z, noise) sample grid for one iteration; identical across runs.
Rgb8Image sample_grid(const GanModel& model, const Tensor& standardized_conditions, std::uint64_t seed);

numerics::Checkpoint gan_checkpoint(const GanModel& model, const ConditionStats& stats, std::size_t iterations,
                                    double path_length_mean);

struct LoadedGan {
  GanModel model;
  ConditionStats stats;
  std::size_t iterations = 0;
};

/// CompatError when the checkpoint is not a GAN checkpoint or does not match its config.
LoadedGan load_gan(const numerics::Checkpoint& checkpoint);

/// Images for raw (unstandardized) conditions with a fixed seed for z and noise.
Tensor generate_images(const GanModel& model, const ConditionStats& stats, const std::vector<Condition>& raw,
                       std::uint64_t seed);

}  // namespace mobgen::spatialgen
