#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mobgen/forecaster/model.hpp"
#include "mobgen/ingest/split.hpp"
#include "mobgen/metrics/report.hpp"
#include "mobgen/numerics/checkpoint.hpp"

namespace mobgen::forecaster {

/// Window inputs stacked to [N,T,d] and targets to [N,T',k].
Tensor window_inputs(const std::vector<ingest::Window>& windows, std::size_t input_len, std::size_t input_dim);
Tensor window_targets(const std::vector<ingest::Window>& windows, std::size_t horizon, std::size_t target_dim);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double wall_time = 0.0;  // seconds since training started
};

nlohmann::json to_json(const EpochLog& entry);

struct TrainOptions {
  /// JSON-lines training log, one object per epoch.
  std::optional<std::filesystem::path> log_path;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  ForecastModel model;  // parameters of the best validation epoch
  std::vector<EpochLog> curve;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  std::size_t train_windows = 0;
  std::size_t val_windows = 0;
};

/// Adam on smooth-L1 with global-norm clipping; seeded shuffling and dropout.
/// The latest windows (by first year, then tract id) form the validation set;
/// the epoch with the lowest validation loss (training loss when there is no
/// validation set) is kept. A non-finite loss aborts with NumericError naming
/// the epoch, batch and parameter norms.
TrainResult train_forecaster(const ingest::SplitDataset& data, const ForecastConfig& config,
                             const TrainOptions& options = {});

/// Model configuration adapted to a split (input width, window lengths).
ForecastConfig fit_config_to_split(ForecastConfig config, const ingest::SplitDataset& data);

struct Prediction {
  Tensor standardized;  // [N,T',k]
  AttentionMaps attention;
};

/// Deterministic inference (dropout off).
Prediction predict(const ForecastModel& model, const std::vector<ingest::Window>& windows);

/// De-standardizes target k of a [N,T',k] tensor into raw units, row-major.
std::vector<double> destandardize_targets(const Tensor& standardized, const ingest::FeatureStats& stats);

/// RMSE, R^2 and DTW (per-window trajectories, L1 over the k targets) in
/// raw units and in standardized units. DataError on an empty test set.
metrics::ForecastRow evaluate_forecaster(const ForecastModel& model, const std::vector<ingest::Window>& test,
                                         const ingest::FeatureStats& stats);
/// Same scores for given predictions.
metrics::ForecastRow score_predictions(const std::string& label, const Tensor& predicted_standardized,
                                       const std::vector<ingest::Window>& test, const ingest::FeatureStats& stats);

/// CSV of head-averaged attention weights: window, tract_id, first_year,
/// decoder_step, then one column per encoder step.
std::string attention_csv(const std::vector<ingest::Window>& windows, const AttentionMaps& attention);

numerics::Checkpoint forecast_checkpoint(const ForecastModel& model, const ingest::SplitDataset& data,
                                         std::size_t best_epoch);

struct LoadedForecaster {
  ForecastModel model;
  ingest::FeatureStats stats;
  std::vector<std::size_t> input_features;
  ingest::SplitConfig split;
};

/// CompatError on a non-forecaster checkpoint or a shape/name mismatch.
LoadedForecaster load_forecaster(const numerics::Checkpoint& checkpoint);

nlohmann::json to_json(const ingest::FeatureStats& stats);
ingest::FeatureStats feature_stats_from_json(const nlohmann::json& j);

}  // namespace mobgen::forecaster
