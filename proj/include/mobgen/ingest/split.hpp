#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mobgen/ingest/preprocess.hpp"
#include "mobgen/ingest/records.hpp"

namespace mobgen::ingest {

struct SplitConfig {
  int boundary_year = 2017;
  std::size_t input_len = 3;
  std::size_t horizon = 3;
  double iqr_multiplier = 1.5;
  bool drop_zero_rows = true;
};

/// Per-feature standardization statistics, fitted on training-period records.
struct FeatureStats {
  std::array<ColumnStats, kFeatureCount> columns{};

  /// Constant features pass through unchanged.
  double standardize(std::size_t feature, double x) const;
  double destandardize(std::size_t feature, double z) const;
};

/// One tract's standardized, year-ordered observations.
struct TractSeries {
  std::string tract_id;
  std::vector<int> years;
  std::vector<std::array<double, kFeatureCount>> values;
};

/// Input years [first_year, first_year + input_len), target years the
/// following `horizon` years.
struct Window {
  std::string tract_id;
  int first_year = 0;
  std::vector<double> inputs;   // input_len x input_features.size(), standardized
  std::vector<double> targets;  // horizon x kTravelCount, standardized

  int last_target_year(std::size_t input_len, std::size_t horizon) const {
    return first_year + static_cast<int>(input_len + horizon) - 1;
  }
};

struct SplitReport {
  std::size_t records_in = 0;
  std::size_t zero_rows_dropped = 0;
  std::size_t outlier_rows_dropped = 0;
  std::array<std::size_t, kFeatureCount> outliers_per_feature{};
  std::size_t series = 0;
  std::size_t series_too_short = 0;
  std::size_t windows_with_gaps = 0;
  std::size_t train_windows = 0;
  std::size_t test_windows = 0;
  std::size_t straddling_windows = 0;
  std::vector<std::string> dropped_constant_inputs;
  std::vector<std::string> raw_constant_targets;
};

struct SplitDataset {
  SplitConfig config;
  FeatureStats stats;
  /// Demographic feature indices used as model input (constant ones removed).
  std::vector<std::size_t> input_features;
  std::vector<Window> train;
  std::vector<Window> test;
  SplitReport report;
};

/// Groups standardized records by tract, years ascending.
std::vector<TractSeries> build_series(const std::vector<TractRecord>& records, const FeatureStats& stats);

/// Cuts contiguous (input_len + horizon)-year windows from each series. A window
/// is train iff its last target year <= boundary and test iff its first target
/// year > boundary; windows straddling the boundary are discarded and counted.
/// Series shorter than one window are skipped and counted.
void window_series(const std::vector<TractSeries>& series, const std::vector<std::size_t>& input_features,
                   SplitDataset& out);

/// Full pipeline: zero-row drop, IQR fences fitted on the training period and
/// applied to every record, train-only z-score statistics, windowing.
SplitDataset chronological_split(const std::vector<TractRecord>& records, const SplitConfig& config = {});

/// Plain-text split manifest (counts, boundary, dropped-row statistics).
std::string split_report_text(const SplitDataset& data);

/// SHA-256 over the windows, statistics and configuration.
std::string split_digest(const SplitDataset& data);

}  // namespace mobgen::ingest
