#include "mobgen/ingest/split.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <sstream>

#include "mobgen/numerics/digest.hpp"

namespace mobgen::ingest {

double FeatureStats::standardize(std::size_t feature, double x) const {
  const ColumnStats& s = columns.at(feature);
  return s.constant() ? x : ingest::standardize(x, s);
}

double FeatureStats::destandardize(std::size_t feature, double z) const {
  const ColumnStats& s = columns.at(feature);
  return s.constant() ? z : ingest::destandardize(z, s);
}

std::vector<TractSeries> build_series(const std::vector<TractRecord>& records, const FeatureStats& stats) {
  std::map<std::string, std::vector<const TractRecord*>> by_tract;
  for (const TractRecord& r : records) by_tract[r.tract_id].push_back(&r);
  std::vector<TractSeries> out;
  out.reserve(by_tract.size());
  for (auto& [id, rows] : by_tract) {
    std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->year < b->year; });
    TractSeries s;
    s.tract_id = id;
    for (const TractRecord* r : rows) {
      s.years.push_back(r->year);
      std::array<double, kFeatureCount> v{};
      for (std::size_t f = 0; f < kFeatureCount; ++f) v[f] = stats.standardize(f, r->feature(f));
      s.values.push_back(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void window_series(const std::vector<TractSeries>& series, const std::vector<std::size_t>& input_features,
                   SplitDataset& out) {
  const SplitConfig& cfg = out.config;
  const std::size_t span = cfg.input_len + cfg.horizon;
  for (const TractSeries& s : series) {
    ++out.report.series;
    if (s.years.size() < span) {
      ++out.report.series_too_short;
      continue;
    }
    for (std::size_t i = 0; i + span <= s.years.size(); ++i) {
      if (s.years[i + span - 1] - s.years[i] != static_cast<int>(span) - 1) {
        ++out.report.windows_with_gaps;
        continue;
      }
      Window w;
      w.tract_id = s.tract_id;
      w.first_year = s.years[i];
      const int first_target = w.first_year + static_cast<int>(cfg.input_len);
      const int last_target = w.last_target_year(cfg.input_len, cfg.horizon);
      const bool train = last_target <= cfg.boundary_year;
      const bool test = first_target > cfg.boundary_year;
      if (!train && !test) {
        ++out.report.straddling_windows;
        continue;
      }
      for (std::size_t t = 0; t < cfg.input_len; ++t) {
        for (std::size_t f : input_features) w.inputs.push_back(s.values[i + t][f]);
      }
      for (std::size_t t = 0; t < cfg.horizon; ++t) {
        for (std::size_t k = 0; k < kTravelCount; ++k) {
          w.targets.push_back(s.values[i + cfg.input_len + t][kDemographicCount + k]);
        }
      }
      (train ? out.train : out.test).push_back(std::move(w));
    }
  }
  out.report.train_windows = out.train.size();
  out.report.test_windows = out.test.size();
  if (out.report.series_too_short > 0) {
    spdlog::info("skipped {} series shorter than {} years", out.report.series_too_short, span);
  }
}

SplitDataset chronological_split(const std::vector<TractRecord>& records, const SplitConfig& config) {
  if (config.input_len == 0 || config.horizon == 0) {
    throw std::invalid_argument("input_len and horizon must be positive");
  }
  SplitDataset out;
  out.config = config;
  out.report.records_in = records.size();

  std::vector<TractRecord> kept = config.drop_zero_rows ? zero_row_drop(records) : records;
  out.report.zero_rows_dropped = records.size() - kept.size();

  // Outlier fences come from the training period only, then apply everywhere.
  std::vector<std::size_t> train_rows;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].year <= config.boundary_year) train_rows.push_back(i);
  }
  if (train_rows.size() >= 4) {
    std::vector<bool> outlier(kept.size(), false);
    std::vector<double> column(train_rows.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      for (std::size_t j = 0; j < train_rows.size(); ++j) column[j] = kept[train_rows[j]].feature(f);
      const Fences fences = iqr_fences(column, config.iqr_multiplier);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (!fences.contains(kept[i].feature(f))) {
          ++out.report.outliers_per_feature[f];
          outlier[i] = true;
        }
      }
    }
    std::vector<TractRecord> filtered;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (!outlier[i]) filtered.push_back(std::move(kept[i]));
    }
    out.report.outlier_rows_dropped = kept.size() - filtered.size();
    kept = std::move(filtered);
  } else {
    spdlog::warn("fewer than 4 training-period records; IQR filter skipped");
  }

  std::vector<double> column;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    column.clear();
    for (const TractRecord& r : kept) {
      if (r.year <= config.boundary_year) column.push_back(r.feature(f));
    }
    if (column.empty()) throw std::invalid_argument("no training-period records to fit statistics on");
    out.stats.columns[f] = column_stats(column);
    if (!out.stats.columns[f].constant()) {
      if (f < kDemographicCount) out.input_features.push_back(f);
      continue;
    }
    if (f < kDemographicCount) {
      out.report.dropped_constant_inputs.emplace_back(kFeatureNames[f]);
      spdlog::warn("demographic feature {} is constant in the training period; dropped from model input",
                   kFeatureNames[f]);
    } else {
      out.report.raw_constant_targets.emplace_back(kFeatureNames[f]);
      spdlog::warn("target {} is constant in the training period; kept unstandardized", kFeatureNames[f]);
    }
  }
  if (out.input_features.empty()) throw std::invalid_argument("every demographic feature is constant");

  window_series(build_series(kept, out.stats), out.input_features, out);
  return out;
}

std::string split_report_text(const SplitDataset& data) {
  const SplitReport& r = data.report;
  std::ostringstream os;
  os << "boundary_year: " << data.config.boundary_year << '\n'
     << "input_len: " << data.config.input_len << '\n'
     << "horizon: " << data.config.horizon << '\n'
     << "records_in: " << r.records_in << '\n'
     << "zero_rows_dropped: " << r.zero_rows_dropped << '\n'
     << "outlier_rows_dropped: " << r.outlier_rows_dropped << '\n';
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (r.outliers_per_feature[f] > 0) {
      os << "  outliers[" << kFeatureNames[f] << "]: " << r.outliers_per_feature[f] << '\n';
    }
  }
  os << "series: " << r.series << '\n'
     << "series_too_short: " << r.series_too_short << '\n'
     << "windows_with_gaps: " << r.windows_with_gaps << '\n'
     << "straddling_windows: " << r.straddling_windows << '\n'
     << "train_windows: " << r.train_windows << '\n'
     << "test_windows: " << r.test_windows << '\n';
  for (const auto& name : r.dropped_constant_inputs) os << "dropped_constant_input: " << name << '\n';
  for (const auto& name : r.raw_constant_targets) os << "raw_constant_target: " << name << '\n';
  return os.str();
}

std::string split_digest(const SplitDataset& data) {
  std::string buf;
  auto put_bytes = [&](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  auto put_double = [&](double v) { put_bytes(&v, sizeof v); };
  auto put_int = [&](std::int64_t v) { put_bytes(&v, sizeof v); };
  put_int(data.config.boundary_year);
  put_int(static_cast<std::int64_t>(data.config.input_len));
  put_int(static_cast<std::int64_t>(data.config.horizon));
  put_double(data.config.iqr_multiplier);
  for (const ColumnStats& s : data.stats.columns) {
    put_double(s.mu);
    put_double(s.sigma);
  }
  for (std::size_t f : data.input_features) put_int(static_cast<std::int64_t>(f));
  for (const auto* part : {&data.train, &data.test}) {
    put_int(static_cast<std::int64_t>(part->size()));
    for (const Window& w : *part) {
      buf += w.tract_id;
      buf.push_back('\0');
      put_int(w.first_year);
      for (double v : w.inputs) put_double(v);
      for (double v : w.targets) put_double(v);
    }
  }
  return numerics::sha256_hex(buf);
}

}  // namespace mobgen::ingest
