#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mobgen/cli/manifest.hpp"
#include "mobgen/ingest/split.hpp"
#include "mobgen/spatialgen/image_io.hpp"

namespace mobgen::cli {

namespace fs = std::filesystem;

struct SynthOptions {
  fs::path out;
  std::uint64_t seed = 0;
  std::size_t tracts = 200;
  double noise = 0.1;
  int first_year = 2012;
  int last_year = 2023;
  std::optional<int> shock_year;
  std::size_t image_size = 32;
  bool images = true;
};

struct TrainForecasterOptions {
  fs::path out;
  std::uint64_t seed = 0;
  fs::path data;
  std::vector<std::string> models{"tft"};
  int boundary_year = 2017;
  // Unset fields keep the per-model defaults.
  std::optional<std::size_t> epochs, hidden, layers, heads, batch;
  std::optional<double> dropout, lr;
};

struct ForecastOptions {
  fs::path out;
  std::uint64_t seed = 0;
  fs::path checkpoint;
  fs::path data;
  /// "latest": one window per tract ending at its last year; "all": every window.
  std::string windows = "latest";
};

struct TrainGanOptions {
  fs::path out;
  std::uint64_t seed = 0;
  fs::path images;
  std::vector<std::size_t> latent_dims;  // empty: config default
  std::optional<std::size_t> iterations, batch, base_channels, sample_every, checkpoint_every;
  std::optional<double> lr_g, lr_d;
  std::optional<std::string> regularizer;
  /// JSON with the condition statistics to train with (condition_stats.json or forecast.meta.json).
  std::optional<fs::path> condition_stats;
  /// Number of corpus images generated for the FID/SSIM rows (0: all).
  std::size_t eval_count = 256;
};

struct GenerateOptions {
  fs::path out;
  std::uint64_t seed = 0;
  fs::path checkpoint;
  fs::path forecast;
  /// Defaults to the forecast's sidecar <stem>.meta.json.
  std::optional<fs::path> meta;
};

struct EvaluateOptions {
  fs::path out;
  std::uint64_t seed = 0;
  std::optional<fs::path> forecast, truth;
  std::optional<fs::path> images, reference;
};

void cmd_synth(const SynthOptions& options, RunManifest& manifest);
void cmd_train_forecaster(const TrainForecasterOptions& options, RunManifest& manifest);
void cmd_forecast(const ForecastOptions& options, RunManifest& manifest);
void cmd_train_gan(const TrainGanOptions& options, RunManifest& manifest);
void cmd_generate(const GenerateOptions& options, RunManifest& manifest);
void cmd_evaluate(const EvaluateOptions& options, RunManifest& manifest);

/// One row of a forecast CSV: raw-unit predictions for one tract and year.
struct ForecastRecord {
  std::string tract_id;
  int first_input_year = 0;
  int year = 0;
  std::size_t step = 0;
  spatialgen::Condition travel{};
};

std::string forecast_csv_header();
/// DataError with the line number on a malformed row or header.
std::vector<ForecastRecord> read_forecast_csv(const fs::path& path);

/// Per-tract windows of `input_len` consecutive years, standardized with
/// `stats`. `latest_only` keeps the window ending at each tract's last year.
std::vector<ingest::Window> forecast_windows(const std::vector<ingest::TractRecord>& records,
                                             const ingest::FeatureStats& stats,
                                             const std::vector<std::size_t>& input_features, std::size_t input_len,
                                             bool latest_only);

}  // namespace mobgen::cli
