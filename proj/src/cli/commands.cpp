#include "mobgen/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mobgen/errors.hpp"
#include "mobgen/forecaster/train.hpp"
#include "mobgen/ingest/csv.hpp"
#include "mobgen/ingest/preprocess.hpp"
#include "mobgen/metrics/dtw.hpp"
#include "mobgen/metrics/features.hpp"
#include "mobgen/metrics/frechet.hpp"
#include "mobgen/metrics/regression.hpp"
#include "mobgen/metrics/report.hpp"
#include "mobgen/metrics/ssim.hpp"
#include "mobgen/numerics/checkpoint.hpp"
#include "mobgen/spatialgen/train.hpp"
#include "mobgen/synthdata/render.hpp"
#include "mobgen/synthdata/world.hpp"

namespace mobgen::cli {

using ingest::kDemographicCount;
using ingest::kTravelCount;
using numerics::Tensor;
using spatialgen::Condition;
using spatialgen::ConditionStats;

namespace {

constexpr std::size_t kMaxDiagnostics = 20;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(path.string() + " is not valid JSON: " + e.what());
  }
}

std::vector<ingest::TractRecord> load_records(const fs::path& path) {
  ingest::LoadResult loaded = ingest::load_csv(path);
  if (!loaded.rejected.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": " << loaded.rejected.size() << " invalid row(s)";
    for (std::size_t i = 0; i < std::min(kMaxDiagnostics, loaded.rejected.size()); ++i) {
      msg << "\n  line " << loaded.rejected[i].line << ": " << loaded.rejected[i].message;
    }
    throw DataError(msg.str());
  }
  if (loaded.records.empty()) throw DataError(path.string() + " has no records");
  return std::move(loaded.records);
}

ConditionStats condition_stats_of(const ingest::FeatureStats& stats) {
  ConditionStats out;
  for (std::size_t k = 0; k < kTravelCount; ++k) {
    out.mu[k] = stats.columns[kDemographicCount + k].mu;
    out.sigma[k] = stats.columns[kDemographicCount + k].sigma;
  }
  return out;
}

// Accepts either bare condition statistics or an object carrying them under "condition_stats".
ConditionStats read_condition_stats(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  return spatialgen::condition_stats_from_json(j.contains("condition_stats") ? j.at("condition_stats") : j);
}

bool same_stats(const ConditionStats& a, const ConditionStats& b) {
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)); };
  for (std::size_t k = 0; k < kTravelCount; ++k) {
    if (!close(a.mu[k], b.mu[k]) || !close(a.sigma[k], b.sigma[k])) return false;
  }
  return true;
}

Tensor first_rows(const Tensor& t, std::size_t n) {
  const std::size_t per = t.numel() / t.dim(0);
  numerics::Shape shape = t.shape();
  shape[0] = n;
  return Tensor(shape, std::vector<double>(t.values().begin(), t.values().begin() + static_cast<long>(n * per)));
}

double mean_paired_ssim(const Tensor& a, const Tensor& b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.dim(0); ++i) total += metrics::ssim(a, i, b, i);
  return total / static_cast<double>(a.dim(0));
}

double fid(const Tensor& real, const Tensor& fake) {
  if (real.dim(0) < 2 || fake.dim(0) < 2) throw DataError("Frechet distance needs at least 2 images per set");
  const metrics::FeatureExtractor extractor(metrics::ExtractorKind::kRandomConv, 0);
  return metrics::frechet_distance(extractor.extract(real), extractor.extract(fake));
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tensor load_pngs(const std::vector<fs::path>& paths) {
  std::vector<spatialgen::Rgb8Image> images;
  images.reserve(paths.size());
  for (const auto& p : paths) images.push_back(spatialgen::read_png(p));
  return spatialgen::to_tensor(images);
}

void write_report(const fs::path& dir, const std::string& stem, const metrics::MetricsReport& report) {
  write_text(dir / (stem + ".json"), metrics::to_json(report));
  const std::string table = metrics::to_table(report);
  write_text(dir / (stem + ".txt"), table);
  std::cout << table;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string forecast_csv_header() {
  std::string header = "tract_id,first_input_year,year,step";
  for (std::size_t k = 0; k < kTravelCount; ++k) header += "," + std::string(ingest::kFeatureNames[kDemographicCount + k]);
  return header;
}

std::vector<ForecastRecord> read_forecast_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty forecast file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != forecast_csv_header()) {
    throw DataError(path.string() + ": line 1: expected header '" + forecast_csv_header() + "'");
  }
  std::vector<ForecastRecord> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    auto fail = [&](const std::string& why) {
      throw DataError(path.string() + ": line " + std::to_string(number) + ": " + why);
    };
    if (cells.size() != 4 + kTravelCount) fail("expected " + std::to_string(4 + kTravelCount) + " fields");
    ForecastRecord r;
    r.tract_id = cells[0];
    if (r.tract_id.empty()) fail("empty tract_id");
    if (!parse_number(cells[1], r.first_input_year) || !parse_number(cells[2], r.year) ||
        !parse_number(cells[3], r.step)) {
      fail("bad year or step");
    }
    for (std::size_t k = 0; k < kTravelCount; ++k) {
      if (!parse_number(cells[4 + k], r.travel[k]) || !std::isfinite(r.travel[k])) {
        fail("bad value for " + std::string(ingest::kFeatureNames[kDemographicCount + k]));
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ingest::Window> forecast_windows(const std::vector<ingest::TractRecord>& records,
                                             const ingest::FeatureStats& stats,
                                             const std::vector<std::size_t>& input_features, std::size_t input_len,
                                             bool latest_only) {
  std::vector<ingest::Window> out;
  for (const ingest::TractSeries& s : ingest::build_series(records, stats)) {
    if (s.years.size() < input_len) continue;
    std::size_t first = latest_only ? s.years.size() - input_len : 0;
    for (std::size_t i = first; i + input_len <= s.years.size(); ++i) {
      if (s.years[i + input_len - 1] - s.years[i] != static_cast<int>(input_len) - 1) continue;
      ingest::Window w;
      w.tract_id = s.tract_id;
      w.first_year = s.years[i];
      for (std::size_t t = 0; t < input_len; ++t) {
        for (std::size_t f : input_features) w.inputs.push_back(s.values[i + t][f]);
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

void cmd_synth(const SynthOptions& o, RunManifest& manifest) {
  ensure_dir(o.out);
  synthdata::WorldConfig world_cfg;
  world_cfg.n_tracts = o.tracts;
  world_cfg.first_year = o.first_year;
  world_cfg.last_year = o.last_year;
  world_cfg.seed = o.seed;
  world_cfg.noise_std = o.noise;
  world_cfg.shock_year = o.shock_year;
  const synthdata::World world = synthdata::gen_tracts(world_cfg);

  ingest::save_csv(o.out / "tracts.csv", world.records);
  ingest::save_csv(o.out / "tracts_noiseless.csv", world.noiseless);
  write_text(o.out / "truth.json", synthdata::truth_json(world.truth) + "\n");
  for (const char* name : {"tracts.csv", "tracts_noiseless.csv", "truth.json"}) manifest.add_artifact(o.out / name);
  if (o.images) {
    synthdata::RenderConfig render;
    render.size = o.image_size;
    render.seed = o.seed;
    synthdata::gen_images(world.records, render, o.out / "images");
    manifest.add_artifact(o.out / "images");
  }
  spdlog::info("wrote {} records for {} tracts to {}", world.records.size(), o.tracts, o.out.string());
}

void cmd_train_forecaster(const TrainForecasterOptions& o, RunManifest& manifest) {
  std::vector<forecaster::ForecastConfig> configs;
  for (const std::string& name : o.models) {
    forecaster::ForecastConfig c = forecaster::ForecastConfig::defaults(forecaster::parse_model_kind(name));
    c.seed = o.seed;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.hidden) c.hidden = *o.hidden;
    if (o.layers) c.layers = *o.layers;
    if (o.heads) c.heads = *o.heads;
    if (o.batch) c.batch = *o.batch;
    if (o.dropout) c.dropout = *o.dropout;
    if (o.lr) c.lr = *o.lr;
    c.validate();
    configs.push_back(c);
  }
  const auto records = load_records(o.data);
  manifest.add_input("data", o.data);
  ensure_dir(o.out);
  if (o.epochs && *o.epochs == 0) {
    spdlog::info("epochs = 0: nothing to train");
    return;
  }

  ingest::SplitConfig split_cfg;
  split_cfg.boundary_year = o.boundary_year;
  const ingest::SplitDataset data = ingest::chronological_split(records, split_cfg);
  spdlog::info("{} train windows, {} test windows", data.train.size(), data.test.size());
  write_text(o.out / "split_report.txt", ingest::split_report_text(data));
  write_text(o.out / "condition_stats.json", spatialgen::to_json(condition_stats_of(data.stats)).dump(2) + "\n");
  manifest.add_artifact(o.out / "split_report.txt");
  manifest.add_artifact(o.out / "condition_stats.json");

  metrics::MetricsReport report;
  report.metadata["data_sha256"] = manifest.input_digests().at("data");
  report.metadata["split_sha256"] = ingest::split_digest(data);
  report.metadata["config_sha256"] = manifest.config_digest();
  report.metadata["seed"] = std::to_string(o.seed);
  for (const auto& cfg : configs) {
    const std::string name = forecaster::to_string(cfg.kind);
    const fs::path dir = o.out / name;
    ensure_dir(dir);
    const forecaster::TrainResult result = forecaster::train_forecaster(data, cfg, {dir / "log.jsonl", nullptr});
    numerics::save_checkpoint(dir / "forecaster.ckpt",
                              forecaster::forecast_checkpoint(result.model, data, result.best_epoch));
    manifest.add_artifact(dir);
    if (data.test.empty()) {
      spdlog::warn("no test windows; {} is not scored", name);
      continue;
    }
    report.forecast.push_back(forecaster::evaluate_forecaster(result.model, data.test, data.stats));
  }
  write_report(o.out, "metrics", report);
  manifest.add_artifact(o.out / "metrics.json");
  manifest.add_artifact(o.out / "metrics.txt");
}

void cmd_forecast(const ForecastOptions& o, RunManifest& manifest) {
  if (o.windows != "latest" && o.windows != "all") throw std::invalid_argument("--windows must be latest or all");
  forecaster::LoadedForecaster loaded = forecaster::load_forecaster(numerics::load_checkpoint(o.checkpoint));
  manifest.add_input("checkpoint", o.checkpoint);
  const auto records = load_records(o.data);
  manifest.add_input("data", o.data);
  const auto& cfg = loaded.model.config();
  const auto windows =
      forecast_windows(records, loaded.stats, loaded.input_features, cfg.input_len, o.windows == "latest");
  if (windows.empty()) {
    throw DataError("no tract has " + std::to_string(cfg.input_len) + " consecutive years of records");
  }
  const forecaster::Prediction pred = forecaster::predict(loaded.model, windows);
  const std::vector<double> raw = forecaster::destandardize_targets(pred.standardized, loaded.stats);

  ensure_dir(o.out);
  std::ostringstream csv;
  csv << forecast_csv_header() << '\n';
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (std::size_t s = 0; s < cfg.horizon; ++s) {
      csv << windows[w].tract_id << ',' << windows[w].first_year << ','
          << windows[w].first_year + static_cast<int>(cfg.input_len + s) << ',' << s + 1;
      for (std::size_t k = 0; k < kTravelCount; ++k) {
        csv << ',' << ingest::format_real(raw[(w * cfg.horizon + s) * kTravelCount + k]);
      }
      csv << '\n';
    }
  }
  write_text(o.out / "forecast.csv", csv.str());
  const nlohmann::json meta{{"checkpoint_sha256", manifest.input_digests().at("checkpoint")},
                            {"model", forecaster::to_string(cfg.kind)},
                            {"input_len", cfg.input_len},
                            {"horizon", cfg.horizon},
                            {"condition_stats", spatialgen::to_json(condition_stats_of(loaded.stats))}};
  write_text(o.out / "forecast.meta.json", meta.dump(2) + "\n");
  manifest.add_artifact(o.out / "forecast.csv");
  manifest.add_artifact(o.out / "forecast.meta.json");
  if (pred.attention.mean.defined()) {
    write_text(o.out / "attention.csv", forecaster::attention_csv(windows, pred.attention));
    manifest.add_artifact(o.out / "attention.csv");
  }
  spdlog::info("forecast {} windows x {} years", windows.size(), cfg.horizon);
}

void cmd_train_gan(const TrainGanOptions& o, RunManifest& manifest) {
  const spatialgen::ImageDataset data = spatialgen::load_image_dir(o.images);
  manifest.add_input("images", o.images);
  std::optional<ConditionStats> stats;
  if (o.condition_stats) {
    stats = read_condition_stats(*o.condition_stats);
    manifest.add_input("condition_stats", *o.condition_stats);
  }
  std::vector<std::size_t> dims = o.latent_dims;
  if (dims.empty()) dims.push_back(spatialgen::GanConfig{}.latent_dim);
  std::vector<spatialgen::GanConfig> configs;
  for (std::size_t dim : dims) {
    spatialgen::GanConfig c;
    c.latent_dim = dim;
    c.image_size = data.images.dim(2);
    c.seed = o.seed;
    if (o.iterations) c.iterations = *o.iterations;
    if (o.batch) c.batch = *o.batch;
    if (o.base_channels) c.base_channels = *o.base_channels;
    if (o.sample_every) c.sample_every = *o.sample_every;
    if (o.checkpoint_every) c.checkpoint_every = *o.checkpoint_every;
    if (o.lr_g) c.lr_g = *o.lr_g;
    if (o.lr_d) c.lr_d = *o.lr_d;
    if (o.regularizer) c.regularizer = spatialgen::parse_regularizer(*o.regularizer);
    c.validate();
    configs.push_back(c);
  }
  ensure_dir(o.out);

  const std::size_t n = o.eval_count == 0 ? data.conditions.size() : std::min(o.eval_count, data.conditions.size());
  const std::vector<Condition> eval_conditions(data.conditions.begin(), data.conditions.begin() + static_cast<long>(n));
  const Tensor real = first_rows(data.images, n);
  metrics::MetricsReport report;
  report.metadata["images_sha256"] = manifest.input_digests().at("images");
  report.metadata["config_sha256"] = manifest.config_digest();
  report.metadata["seed"] = std::to_string(o.seed);
  report.metadata["extractor"] = "random_conv/0";
  report.metadata["eval_images"] = std::to_string(n);
  for (const auto& cfg : configs) {
    const fs::path dir = o.out / ("latent_" + std::to_string(cfg.latent_dim));
    spatialgen::GanTrainOptions train_options;
    train_options.out_dir = dir;
    train_options.condition_stats = stats;
    const spatialgen::GanTrainResult result = spatialgen::train_gan(data, cfg, train_options);
    manifest.add_artifact(dir);
    const Tensor fake = spatialgen::generate_images(result.model, result.stats, eval_conditions, o.seed);
    metrics::ImageRow row;
    row.label = "latent_" + std::to_string(cfg.latent_dim);
    row.latent_dim = cfg.latent_dim;
    row.ssim = mean_paired_ssim(fake, real);
    row.fid = fid(real, fake);
    report.images.push_back(row);
  }
  write_report(o.out, "metrics", report);
  manifest.add_artifact(o.out / "metrics.json");
  manifest.add_artifact(o.out / "metrics.txt");
}

void cmd_generate(const GenerateOptions& o, RunManifest& manifest) {
  spatialgen::LoadedGan gan = spatialgen::load_gan(numerics::load_checkpoint(o.checkpoint));
  manifest.add_input("checkpoint", o.checkpoint);
  const auto rows = read_forecast_csv(o.forecast);
  manifest.add_input("forecast", o.forecast);
  const fs::path meta_path = o.meta.value_or(o.forecast.parent_path() / (o.forecast.stem().string() + ".meta.json"));
  const ConditionStats forecast_stats = read_condition_stats(meta_path);
  manifest.add_input("forecast_meta", meta_path);
  if (!same_stats(forecast_stats, gan.stats)) {
    throw CompatError("the forecast's standardization statistics (" + meta_path.string() +
                      ") differ from the GAN's condition statistics; train the GAN with --condition-stats");
  }

  ensure_dir(o.out);
  constexpr std::size_t kChunk = 64;
  std::vector<spatialgen::IndexEntry> index;
  for (std::size_t first = 0; first < rows.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, rows.size() - first);
    std::vector<Condition> conditions;
    for (std::size_t i = 0; i < count; ++i) conditions.push_back(rows[first + i].travel);
    // One seed per chunk, offset by the chunk's first row.
    const Tensor images = spatialgen::generate_images(gan.model, gan.stats, conditions, o.seed + first);
    for (std::size_t i = 0; i < count; ++i) {
      const std::string id = spatialgen::item_id(first + i);
      spatialgen::write_png(o.out / (id + ".png"), spatialgen::to_rgb8(images, i));
      index.push_back({id, rows[first + i].tract_id, rows[first + i].year});
    }
  }
  spatialgen::write_index(o.out, index);
  manifest.add_artifact(o.out);
  spdlog::info("generated {} images", rows.size());
}

void cmd_evaluate(const EvaluateOptions& o, RunManifest& manifest) {
  if (o.forecast.has_value() != o.truth.has_value()) throw DataError("--forecast and --truth go together");
  if (o.images.has_value() != o.reference.has_value()) throw DataError("--images and --reference go together");
  if (!o.forecast && !o.images) throw DataError("nothing to evaluate: give --forecast/--truth or --images/--reference");

  metrics::MetricsReport report;
  if (o.forecast) {
    const auto rows = read_forecast_csv(*o.forecast);
    manifest.add_input("forecast", *o.forecast);
    const auto truth = load_records(*o.truth);
    manifest.add_input("truth", *o.truth);
    if (rows.empty()) throw DataError("forecast file has no rows");
    std::map<std::pair<std::string, int>, const ingest::TractRecord*> lookup;
    for (const auto& r : truth) lookup[{r.tract_id, r.year}] = &r;

    std::vector<double> pred, actual;
    for (const auto& r : rows) {
      const auto found = lookup.find({r.tract_id, r.year});
      if (found == lookup.end()) {
        throw DataError("forecast row " + r.tract_id + " " + std::to_string(r.year) + " has no reference record");
      }
      pred.insert(pred.end(), r.travel.begin(), r.travel.end());
      actual.insert(actual.end(), found->second->travel.begin(), found->second->travel.end());
    }

    // Standardized scores use the forecast's statistics when its sidecar exists.
    ConditionStats z;
    const fs::path meta = o.forecast->parent_path() / (o.forecast->stem().string() + ".meta.json");
    if (fs::exists(meta)) {
      z = read_condition_stats(meta);
    } else {
      std::array<std::vector<double>, kTravelCount> cols;
      for (std::size_t i = 0; i < actual.size(); ++i) cols[i % kTravelCount].push_back(actual[i]);
      for (std::size_t k = 0; k < kTravelCount; ++k) {
        const auto s = ingest::column_stats(cols[k]);
        z.mu[k] = s.mu;
        z.sigma[k] = s.sigma;
      }
    }
    auto standardize = [&](std::vector<double> v) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t k = i % kTravelCount;
        if (z.sigma[k] > 0) v[i] = (v[i] - z.mu[k]) / z.sigma[k];
      }
      return v;
    };
    const auto pred_z = standardize(pred), actual_z = standardize(actual);

    metrics::ForecastRow row;
    row.model = "forecast";
    const auto raw_scores = metrics::regression_scores(pred, actual, kTravelCount);
    const auto z_scores = metrics::regression_scores(pred_z, actual_z, kTravelCount);
    row.rmse = raw_scores.rmse_mean;
    row.r2 = raw_scores.r2_mean;
    row.rmse_per_target = raw_scores.rmse_per_target;
    row.r2_per_target = raw_scores.r2_per_target;
    row.rmse_standardized = z_scores.rmse_mean;
    row.r2_standardized = z_scores.r2_mean;

    // DTW per forecast window (tract, first input year), steps in order.
    std::map<std::pair<std::string, int>, std::vector<std::pair<std::size_t, std::size_t>>> windows;
    for (std::size_t i = 0; i < rows.size(); ++i) windows[{rows[i].tract_id, rows[i].first_input_year}].push_back({rows[i].step, i});
    double dtw_raw = 0.0, dtw_z = 0.0;
    for (auto& [key, members] : windows) {
      std::sort(members.begin(), members.end());
      std::vector<double> a, b, az, bz;
      for (const auto& [step, i] : members) {
        for (std::size_t k = 0; k < kTravelCount; ++k) {
          a.push_back(pred[i * kTravelCount + k]);
          b.push_back(actual[i * kTravelCount + k]);
          az.push_back(pred_z[i * kTravelCount + k]);
          bz.push_back(actual_z[i * kTravelCount + k]);
        }
      }
      dtw_raw += metrics::dtw(a, b, kTravelCount);
      dtw_z += metrics::dtw(az, bz, kTravelCount);
    }
    row.dtw = dtw_raw / static_cast<double>(windows.size());
    row.dtw_standardized = dtw_z / static_cast<double>(windows.size());
    report.forecast.push_back(row);
  }
  if (o.images) {
    const auto generated = list_pngs(*o.images), reference = list_pngs(*o.reference);
    manifest.add_input("images", *o.images);
    manifest.add_input("reference", *o.reference);
    if (generated.size() != reference.size()) {
      throw DataError("image counts differ: " + std::to_string(generated.size()) + " vs " +
                      std::to_string(reference.size()));
    }
    if (generated.empty()) throw DataError("no PNG images in " + o.images->string());
    const Tensor a = load_pngs(generated), b = load_pngs(reference);
    if (a.shape() != b.shape()) throw DataError("generated and reference images differ in size");
    metrics::ImageRow row;
    row.label = "images";
    row.ssim = mean_paired_ssim(a, b);
    row.fid = fid(b, a);
    report.images.push_back(row);
    report.metadata["extractor"] = "random_conv/0";
  }
  for (const auto& [role, digest] : manifest.input_digests()) report.metadata[role + "_sha256"] = digest;
  report.metadata["config_sha256"] = manifest.config_digest();
  ensure_dir(o.out);
  write_report(o.out, "report", report);
  manifest.add_artifact(o.out / "report.json");
  manifest.add_artifact(o.out / "report.txt");
}

}  // namespace mobgen::cli
