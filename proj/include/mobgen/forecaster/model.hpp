#pragma once

#include <optional>

#include "mobgen/forecaster/config.hpp"
#include "mobgen/forecaster/layers.hpp"

namespace mobgen::forecaster {

/// Attention weights from one forward pass, rows = decoder steps, columns =
/// encoder steps. Empty for the models without attention.
struct AttentionMaps {
  /// [B,T',T] averaged over heads.
  Tensor mean;
  /// [B,heads,T',T] for multi-head attention; undefined otherwise.
  Tensor per_head;
};

/// One of the four forecasting models over x [B,T,d] -> y [B,T',k].
///
/// tft:       stacked LSTM encoder, T' learned decoder queries (each offset by
///            the final encoder state) attending over the encoder outputs with
///            multi-head attention, residual add and layer norm, then the FFN
///            head per step.
/// lstm/rnn:  the decoder cell starts from the final encoder state and rolls
///            out T' steps, fed its own previous prediction; FFN head per step.
/// lstm_attn: as lstm, with an additive-attention context over the encoder
///            outputs added to each decoder input.
class ForecastModel {
 public:
  ForecastModel(const ForecastConfig& config, std::uint64_t seed);
  ForecastModel(const ForecastModel&) = delete;
  ForecastModel& operator=(const ForecastModel&) = delete;
  ForecastModel(ForecastModel&&) = default;
  ForecastModel& operator=(ForecastModel&&) = default;

  /// Dropout is active only when `dropout_rng` is given (training mode).
  Tensor forward(const Tensor& x, numerics::Rng* dropout_rng = nullptr, AttentionMaps* attention = nullptr) const;

  const ForecastConfig& config() const { return config_; }
  numerics::ParameterSet& params() { return params_; }
  const numerics::ParameterSet& params() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  const FfnHead& head() const { return head_; }
  const MultiHeadAttention& attention() const { return mha_; }

 private:
  Tensor decode_tft(const Encoded& enc, std::size_t batch, const DropoutCtx& drop, AttentionMaps* attention) const;
  Tensor decode_recurrent(const Encoded& enc, std::size_t batch, const DropoutCtx& drop,
                          AttentionMaps* attention) const;

  ForecastConfig config_;
  numerics::ParameterSet params_;
  Encoder encoder_;
  FfnHead head_;
  // tft
  Tensor queries_;
  MultiHeadAttention mha_;
  LayerNorm norm_;
  // rnn / lstm / lstm_attn
  LstmCell dec_lstm_;
  RnnCell dec_rnn_;
  BahdanauAttention additive_;
};

}  // namespace mobgen::forecaster
