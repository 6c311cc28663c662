#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mobgen::metrics {

/// One forecasting model's scores, averaged over targets.
struct ForecastRow {
  std::string model;
  double rmse = 0.0;                 // de-standardized units
  std::optional<double> r2;
  double dtw = 0.0;
  double rmse_standardized = 0.0;
  std::optional<double> r2_standardized;
  double dtw_standardized = 0.0;
  std::vector<double> rmse_per_target;
  std::vector<std::optional<double>> r2_per_target;
};

/// One image-generation run's scores.
struct ImageRow {
  std::string label;
  std::size_t latent_dim = 0;
  double fid = 0.0;
  double ssim = 0.0;
};

struct MetricsReport {
  std::vector<ForecastRow> forecast;
  std::vector<ImageRow> images;
  std::map<std::string, std::string> metadata;  // digests, config, extractor
};

std::string to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);

/// Aligned plain-text tables: Model | RMSE | R2 | DTW, then Latent | FID | SSIM.
std::string to_table(const MetricsReport& report);

}  // namespace mobgen::metrics
