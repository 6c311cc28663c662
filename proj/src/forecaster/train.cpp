#include "mobgen/forecaster/train.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mobgen/errors.hpp"
#include "mobgen/ingest/csv.hpp"
#include "mobgen/metrics/dtw.hpp"
#include "mobgen/metrics/regression.hpp"
#include "mobgen/numerics/ops.hpp"
#include "mobgen/numerics/optim.hpp"

namespace mobgen::forecaster {

namespace ops = numerics;
using ingest::Window;
using numerics::Rng;

namespace {

constexpr const char* kCheckpointKind = "mobgen.forecaster";

Tensor gather(const Tensor& t, const std::vector<std::size_t>& rows) {
  const std::size_t per = t.numel() / t.dim(0);
  std::vector<double> out;
  out.reserve(rows.size() * per);
  auto v = t.values();
  for (std::size_t r : rows) out.insert(out.end(), v.begin() + r * per, v.begin() + (r + 1) * per);
  numerics::Shape shape = t.shape();
  shape[0] = rows.size();
  return Tensor(shape, std::move(out));
}

std::string norms_text(const numerics::ParameterSet& params) {
  std::ostringstream out;
  for (const auto& [name, t] : params.items()) {
    double ss = 0.0;
    bool finite = true;
    for (double v : t.values()) {
      ss += v * v;
      finite = finite && std::isfinite(v);
    }
    out << ' ' << name << '=' << (finite ? std::sqrt(ss) : NAN);
  }
  return out.str();
}

std::vector<std::vector<double>> snapshot(const numerics::ParameterSet& params) {
  std::vector<std::vector<double>> out;
  for (const auto& [name, t] : params.items()) out.emplace_back(t.values().begin(), t.values().end());
  return out;
}

void restore(numerics::ParameterSet& params, const std::vector<std::vector<double>>& values) {
  std::size_t i = 0;
  for (auto& [name, t] : params.items()) {
    Tensor handle = t;
    std::copy(values[i].begin(), values[i].end(), handle.mutable_values().begin());
    ++i;
  }
}

// Mean smooth-L1 over all rows of (x, y), evaluated in batches without dropout.
double evaluate_loss(const ForecastModel& model, const Tensor& x, const Tensor& y, std::size_t batch) {
  numerics::NoGradGuard no_grad;
  const std::size_t n = x.dim(0);
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += batch) {
    std::vector<std::size_t> rows;
    for (std::size_t i = start; i < std::min(n, start + batch); ++i) rows.push_back(i);
    total += ops::smooth_l1(model.forward(gather(x, rows)), gather(y, rows)).item() * static_cast<double>(rows.size());
  }
  return total / static_cast<double>(n);
}

}  // namespace

Tensor window_inputs(const std::vector<Window>& windows, std::size_t input_len, std::size_t input_dim) {
  std::vector<double> v;
  v.reserve(windows.size() * input_len * input_dim);
  for (const Window& w : windows) {
    if (w.inputs.size() != input_len * input_dim) {
      throw CompatError("window for " + w.tract_id + " has " + std::to_string(w.inputs.size()) +
                        " input values, model expects " + std::to_string(input_len * input_dim));
    }
    v.insert(v.end(), w.inputs.begin(), w.inputs.end());
  }
  return Tensor({windows.size(), input_len, input_dim}, std::move(v));
}

Tensor window_targets(const std::vector<Window>& windows, std::size_t horizon, std::size_t target_dim) {
  std::vector<double> v;
  v.reserve(windows.size() * horizon * target_dim);
  for (const Window& w : windows) {
    if (w.targets.size() != horizon * target_dim) {
      throw CompatError("window for " + w.tract_id + " has " + std::to_string(w.targets.size()) +
                        " target values, model expects " + std::to_string(horizon * target_dim));
    }
    v.insert(v.end(), w.targets.begin(), w.targets.end());
  }
  return Tensor({windows.size(), horizon, target_dim}, std::move(v));
}

nlohmann::json to_json(const EpochLog& e) {
  nlohmann::json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"wall_time", e.wall_time}};
  j["val_loss"] = e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json(nullptr);
  return j;
}

ForecastConfig fit_config_to_split(ForecastConfig config, const ingest::SplitDataset& data) {
  config.input_len = data.config.input_len;
  config.horizon = data.config.horizon;
  config.input_dim = data.input_features.size();
  config.target_dim = ingest::kTravelCount;
  return config;
}

TrainResult train_forecaster(const ingest::SplitDataset& data, const ForecastConfig& requested,
                             const TrainOptions& options) {
  const ForecastConfig config = fit_config_to_split(requested, data);
  config.validate();
  if (data.train.empty()) throw DataError("no training windows");

  // Latest windows go to validation.
  std::vector<Window> ordered = data.train;
  std::stable_sort(ordered.begin(), ordered.end(), [](const Window& a, const Window& b) {
    return a.first_year != b.first_year ? a.first_year < b.first_year : a.tract_id < b.tract_id;
  });
  const auto n_val = static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(ordered.size())));
  const std::vector<Window> train(ordered.begin(), ordered.end() - static_cast<long>(n_val));
  const std::vector<Window> val(ordered.end() - static_cast<long>(n_val), ordered.end());
  if (train.empty()) throw DataError("no training windows left after the validation hold-out");

  TrainResult result{ForecastModel(config, config.seed), {}, 0, train.size(), val.size()};
  ForecastModel& model = result.model;
  const Tensor x = window_inputs(train, config.input_len, config.input_dim);
  const Tensor y = window_targets(train, config.horizon, config.target_dim);
  Tensor vx, vy;
  if (!val.empty()) {
    vx = window_inputs(val, config.input_len, config.input_dim);
    vy = window_targets(val, config.horizon, config.target_dim);
  }

  std::ofstream log;
  if (options.log_path) {
    log.open(*options.log_path, std::ios::binary);
    if (!log) throw IoError("cannot write " + options.log_path->string());
  }

  numerics::Adam adam(model.params().tensors(), {config.lr, 0.9, 0.999, 1e-8});
  Rng shuffle = Rng::substream(config.seed, "shuffle");
  Rng dropout = Rng::substream(config.seed, "dropout");
  std::vector<std::vector<double>> best = snapshot(model.params());
  double best_score = INFINITY;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = shuffle.permutation(train.size());
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += config.batch, ++batch_index) {
      const std::vector<std::size_t> rows(order.begin() + static_cast<long>(first),
                                          order.begin() + static_cast<long>(std::min(order.size(), first + config.batch)));
      try {
        model.params().zero_grad();
        const Tensor loss = ops::smooth_l1(model.forward(gather(x, rows), &dropout), gather(y, rows));
        numerics::backward(loss);
        numerics::clip_grad_norm(model.params().tensors(), config.grad_clip);
        adam.step();
        total += loss.item() * static_cast<double>(rows.size());
      } catch (const numerics::NumericError& e) {
        throw numerics::NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(batch_index) + " (" + e.what() + "); parameter norms:" +
                                     norms_text(model.params()));
      }
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = total / static_cast<double>(train.size());
    if (!val.empty()) entry.val_loss = evaluate_loss(model, vx, vy, config.batch);
    entry.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double score = entry.val_loss.value_or(entry.train_loss);
    if (score < best_score) {
      best_score = score;
      best = snapshot(model.params());
      result.best_epoch = epoch;
    }
    if (log) log << to_json(entry).dump() << '\n';
    if (options.on_epoch) options.on_epoch(entry);
    if (epoch % 20 == 0 || epoch == config.epochs) {
      spdlog::info("{} epoch {} train {:.5f} val {}", to_string(config.kind), epoch, entry.train_loss,
                   entry.val_loss ? std::to_string(*entry.val_loss) : "-");
    }
    result.curve.push_back(entry);
  }
  restore(model.params(), best);
  return result;
}

Prediction predict(const ForecastModel& model, const std::vector<Window>& windows) {
  numerics::NoGradGuard no_grad;
  const ForecastConfig& c = model.config();
  Prediction out;
  const Tensor x = window_inputs(windows, c.input_len, c.input_dim);
  out.standardized = model.forward(x, nullptr, &out.attention);
  return out;
}

std::vector<double> destandardize_targets(const Tensor& standardized, const ingest::FeatureStats& stats) {
  const std::size_t k = standardized.shape().back();
  std::vector<double> raw(standardized.numel());
  auto v = standardized.values();
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = stats.destandardize(ingest::kDemographicCount + i % k, v[i]);
  return raw;
}

metrics::ForecastRow score_predictions(const std::string& label, const Tensor& predicted,
                                       const std::vector<Window>& test, const ingest::FeatureStats& stats) {
  if (test.empty()) throw DataError("empty test set");
  const std::size_t horizon = predicted.dim(1), k = predicted.dim(2);
  const Tensor actual = window_targets(test, horizon, k);
  if (predicted.shape() != actual.shape()) {
    throw DataError("prediction shape " + numerics::shape_str(predicted.shape()) + " does not match targets " +
                    numerics::shape_str(actual.shape()));
  }
  const std::vector<double> pred_raw = destandardize_targets(predicted, stats);
  const std::vector<double> act_raw = destandardize_targets(actual, stats);
  const auto pred_std = predicted.values();
  const auto act_std = actual.values();

  metrics::ForecastRow row;
  row.model = label;
  const auto raw_scores = metrics::regression_scores(pred_raw, act_raw, k);
  const auto std_scores = metrics::regression_scores(pred_std, act_std, k);
  row.rmse = raw_scores.rmse_mean;
  row.r2 = raw_scores.r2_mean;
  row.rmse_per_target = raw_scores.rmse_per_target;
  row.r2_per_target = raw_scores.r2_per_target;
  row.rmse_standardized = std_scores.rmse_mean;
  row.r2_standardized = std_scores.r2_mean;

  const std::size_t per = horizon * k;
  double dtw_raw = 0.0, dtw_std = 0.0;
  for (std::size_t w = 0; w < test.size(); ++w) {
    dtw_raw += metrics::dtw(std::span(pred_raw).subspan(w * per, per), std::span(act_raw).subspan(w * per, per), k);
    dtw_std += metrics::dtw(pred_std.subspan(w * per, per), act_std.subspan(w * per, per), k);
  }
  row.dtw = dtw_raw / static_cast<double>(test.size());
  row.dtw_standardized = dtw_std / static_cast<double>(test.size());
  return row;
}

metrics::ForecastRow evaluate_forecaster(const ForecastModel& model, const std::vector<Window>& test,
                                         const ingest::FeatureStats& stats) {
  if (test.empty()) throw DataError("empty test set");
  return score_predictions(to_string(model.config().kind), predict(model, test).standardized, test, stats);
}

std::string attention_csv(const std::vector<Window>& windows, const AttentionMaps& attention) {
  std::ostringstream out;
  if (!attention.mean.defined()) return out.str();
  const std::size_t steps = attention.mean.dim(1), tk = attention.mean.dim(2);
  out << "window,tract_id,first_year,decoder_step";
  for (std::size_t t = 0; t < tk; ++t) out << ",encoder_" << t;
  out << '\n';
  auto v = attention.mean.values();
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (std::size_t s = 0; s < steps; ++s) {
      out << w << ',' << windows[w].tract_id << ',' << windows[w].first_year << ',' << s;
      for (std::size_t t = 0; t < tk; ++t) out << ',' << ingest::format_real(v[(w * steps + s) * tk + t]);
      out << '\n';
    }
  }
  return out.str();
}

nlohmann::json to_json(const ingest::FeatureStats& stats) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t f = 0; f < ingest::kFeatureCount; ++f) {
    cols.push_back({{"feature", ingest::kFeatureNames[f]}, {"mu", stats.columns[f].mu}, {"sigma", stats.columns[f].sigma}});
  }
  return cols;
}

ingest::FeatureStats feature_stats_from_json(const nlohmann::json& j) {
  ingest::FeatureStats stats;
  try {
    if (!j.is_array() || j.size() != ingest::kFeatureCount) throw CompatError("feature statistics must list 14 columns");
    for (std::size_t f = 0; f < ingest::kFeatureCount; ++f) {
      stats.columns[f].mu = j[f].at("mu").get<double>();
      stats.columns[f].sigma = j[f].at("sigma").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("malformed feature statistics: ") + e.what());
  }
  return stats;
}

numerics::Checkpoint forecast_checkpoint(const ForecastModel& model, const ingest::SplitDataset& data,
                                         std::size_t best_epoch) {
  numerics::Checkpoint ckpt;
  const auto& s = data.config;
  nlohmann::json meta{{"kind", kCheckpointKind},
                      {"config", to_json(model.config())},
                      {"stats", to_json(data.stats)},
                      {"input_features", data.input_features},
                      {"split",
                       {{"boundary_year", s.boundary_year},
                        {"input_len", s.input_len},
                        {"horizon", s.horizon},
                        {"iqr_multiplier", s.iqr_multiplier},
                        {"drop_zero_rows", s.drop_zero_rows}}},
                      {"best_epoch", best_epoch}};
  ckpt.metadata = meta.dump();
  ckpt.tensors = model.params().items();
  return ckpt;
}

LoadedForecaster load_forecaster(const numerics::Checkpoint& checkpoint) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(checkpoint.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("checkpoint metadata is not JSON: ") + e.what());
  }
  if (!meta.is_object() || meta.value("kind", "") != kCheckpointKind) throw CompatError("not a forecaster checkpoint");
  try {
    ForecastConfig cfg = forecast_config_from_json(meta.at("config"));
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw CompatError(e.what());
    }
    ingest::SplitConfig split;
    const auto& s = meta.at("split");
    split.boundary_year = s.at("boundary_year").get<int>();
    split.input_len = s.at("input_len").get<std::size_t>();
    split.horizon = s.at("horizon").get<std::size_t>();
    split.iqr_multiplier = s.at("iqr_multiplier").get<double>();
    split.drop_zero_rows = s.at("drop_zero_rows").get<bool>();
    LoadedForecaster out{ForecastModel(cfg, 0), feature_stats_from_json(meta.at("stats")),
                         meta.at("input_features").get<std::vector<std::size_t>>(), split};
    if (out.input_features.size() != cfg.input_dim) {
      throw CompatError("checkpoint lists " + std::to_string(out.input_features.size()) +
                        " input features but the model expects " + std::to_string(cfg.input_dim));
    }
    out.model.params().assign(checkpoint.tensors);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("malformed forecaster checkpoint: ") + e.what());
  }
}

}  // namespace mobgen::forecaster
