#include "mobgen/forecaster/config.hpp"

#include <stdexcept>

#include "mobgen/errors.hpp"

namespace mobgen::forecaster {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRnn: return "rnn";
    case ModelKind::kLstm: return "lstm";
    case ModelKind::kLstmAttn: return "lstm_attn";
    case ModelKind::kTft: return "tft";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "rnn") return ModelKind::kRnn;
  if (text == "lstm") return ModelKind::kLstm;
  if (text == "lstm_attn") return ModelKind::kLstmAttn;
  if (text == "tft") return ModelKind::kTft;
  throw std::invalid_argument("unknown model kind '" + text + "' (expected rnn, lstm, lstm_attn or tft)");
}

ForecastConfig ForecastConfig::defaults(ModelKind kind) {
  ForecastConfig c;
  c.kind = kind;
  switch (kind) {
    case ModelKind::kRnn:
      c.hidden = 128;
      c.layers = 2;
      break;
    case ModelKind::kLstm:
    case ModelKind::kLstmAttn:
      c.hidden = 256;
      c.layers = 2;
      break;
    case ModelKind::kTft:
      c.hidden = 128;
      c.layers = 4;
      c.heads = 4;
      break;
  }
  return c;
}

void ForecastConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid forecaster config: " + what);
  };
  require(input_len > 0, "input_len must be positive");
  require(horizon > 0, "horizon must be positive");
  require(input_dim > 0 && target_dim > 0, "input_dim and target_dim must be positive");
  require(hidden > 0 && layers > 0, "hidden and layers must be positive");
  if (kind == ModelKind::kTft) {
    require(heads > 0 && hidden % heads == 0,
            "hidden " + std::to_string(hidden) + " is not divisible by heads " + std::to_string(heads));
  }
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(batch > 0, "batch must be positive");
  require(lr > 0.0, "lr must be positive");
  require(grad_clip > 0.0, "grad_clip must be positive");
  require(val_fraction >= 0.0 && val_fraction < 1.0, "val_fraction must lie in [0, 1)");
}

nlohmann::json to_json(const ForecastConfig& c) {
  return {{"kind", to_string(c.kind)}, {"input_len", c.input_len}, {"horizon", c.horizon},
          {"input_dim", c.input_dim},  {"target_dim", c.target_dim}, {"hidden", c.hidden},
          {"layers", c.layers},        {"heads", c.heads},           {"dropout", c.dropout},
          {"epochs", c.epochs},        {"batch", c.batch},           {"lr", c.lr},
          {"grad_clip", c.grad_clip},  {"val_fraction", c.val_fraction}, {"seed", c.seed}};
}

ForecastConfig forecast_config_from_json(const nlohmann::json& j) {
  try {
    ForecastConfig c = ForecastConfig::defaults(parse_model_kind(j.value("kind", std::string("tft"))));
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("input_len", c.input_len);
    get("horizon", c.horizon);
    get("input_dim", c.input_dim);
    get("target_dim", c.target_dim);
    get("hidden", c.hidden);
    get("layers", c.layers);
    get("heads", c.heads);
    get("dropout", c.dropout);
    get("epochs", c.epochs);
    get("batch", c.batch);
    get("lr", c.lr);
    get("grad_clip", c.grad_clip);
    get("val_fraction", c.val_fraction);
    get("seed", c.seed);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CompatError(std::string("malformed forecaster config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CompatError(e.what());
  }
}

}  // namespace mobgen::forecaster
