#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace mobgen::forecaster {

enum class ModelKind { kRnn, kLstm, kLstmAttn, kTft };

std::string to_string(ModelKind kind);
/// "rnn", "lstm", "lstm_attn" or "tft"; invalid_argument otherwise.
ModelKind parse_model_kind(const std::string& text);

struct ForecastConfig {
  ModelKind kind = ModelKind::kTft;
  std::size_t input_len = 3;
  std::size_t horizon = 3;
  std::size_t input_dim = 9;
  std::size_t target_dim = 5;
  std::size_t hidden = 128;
  std::size_t layers = 4;
  std::size_t heads = 4;  // multi-head attention only
  double dropout = 0.1;
  std::size_t epochs = 200;
  std::size_t batch = 16;
  double lr = 5e-4;
  double grad_clip = 5.0;
  /// Share of the (time-ordered) training windows held out for checkpoint selection.
  double val_fraction = 0.1;
  std::uint64_t seed = 0;

  /// Default hyperparameters for each model family.
  static ForecastConfig defaults(ModelKind kind);
  /// invalid_argument naming the offending field.
  void validate() const;
};

nlohmann::json to_json(const ForecastConfig& config);
/// Missing keys keep the defaults of the stored kind. CompatError on bad types.
ForecastConfig forecast_config_from_json(const nlohmann::json& j);

}  // namespace mobgen::forecaster
