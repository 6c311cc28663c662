#include "mobgen/metrics/report.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace mobgen::metrics {

using nlohmann::json;

namespace {

json optional_value(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

void emit_table(std::ostringstream& os, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) os << "  ";
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << rows[i][c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << rows[i][c];
      }
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
}

}  // namespace

std::string to_json(const MetricsReport& report) {
  json j;
  j["metadata"] = report.metadata;
  j["forecast"] = json::array();
  for (const ForecastRow& r : report.forecast) {
    json row{{"model", r.model},
             {"rmse", r.rmse},
             {"r2", optional_value(r.r2)},
             {"dtw", r.dtw},
             {"rmse_standardized", r.rmse_standardized},
             {"r2_standardized", optional_value(r.r2_standardized)},
             {"dtw_standardized", r.dtw_standardized},
             {"rmse_per_target", r.rmse_per_target}};
    json r2s = json::array();
    for (const auto& v : r.r2_per_target) r2s.push_back(optional_value(v));
    row["r2_per_target"] = r2s;
    j["forecast"].push_back(row);
  }
  j["images"] = json::array();
  for (const ImageRow& r : report.images) {
    j["images"].push_back({{"label", r.label}, {"latent_dim", r.latent_dim}, {"fid", r.fid}, {"ssim", r.ssim}});
  }
  return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  MetricsReport out;
  out.metadata = j.value("metadata", std::map<std::string, std::string>{});
  for (const json& row : j.value("forecast", json::array())) {
    ForecastRow r;
    r.model = row.at("model").get<std::string>();
    r.rmse = row.at("rmse").get<double>();
    r.r2 = optional_from(row.at("r2"));
    r.dtw = row.at("dtw").get<double>();
    r.rmse_standardized = row.at("rmse_standardized").get<double>();
    r.r2_standardized = optional_from(row.at("r2_standardized"));
    r.dtw_standardized = row.at("dtw_standardized").get<double>();
    r.rmse_per_target = row.at("rmse_per_target").get<std::vector<double>>();
    for (const json& v : row.at("r2_per_target")) r.r2_per_target.push_back(optional_from(v));
    out.forecast.push_back(std::move(r));
  }
  for (const json& row : j.value("images", json::array())) {
    out.images.push_back({row.at("label").get<std::string>(), row.at("latent_dim").get<std::size_t>(),
                          row.at("fid").get<double>(), row.at("ssim").get<double>()});
  }
  return out;
}

std::string to_table(const MetricsReport& report) {
  std::ostringstream os;
  if (!report.forecast.empty()) {
    std::vector<std::vector<std::string>> rows{{"Model", "RMSE", "R2", "DTW"}};
    for (const ForecastRow& r : report.forecast) rows.push_back({r.model, fixed(r.rmse), fixed(r.r2), fixed(r.dtw)});
    emit_table(os, rows);
  }
  if (!report.images.empty()) {
    if (!report.forecast.empty()) os << '\n';
    std::vector<std::vector<std::string>> rows{{"Run", "Latent", "FID", "SSIM"}};
    for (const ImageRow& r : report.images) {
      rows.push_back({r.label, std::to_string(r.latent_dim), fixed(r.fid), fixed(r.ssim)});
    }
    emit_table(os, rows);
  }
  return os.str();
}

}  // namespace mobgen::metrics
