#include "mobgen/forecaster/model.hpp"

#include <cmath>

#include "mobgen/numerics/ops.hpp"

namespace mobgen::forecaster {

namespace ops = numerics;
using numerics::Rng;

ForecastModel::ForecastModel(const ForecastConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng = Rng::substream(seed, "init");
  const std::size_t m = config_.hidden, k = config_.target_dim;
  const bool lstm = config_.kind != ModelKind::kRnn;
  encoder_ = Encoder(params_, "encoder", lstm, config_.input_dim, m, config_.layers, rng);
  switch (config_.kind) {
    case ModelKind::kTft:
      queries_ = params_.add("decoder.queries",
                             numerics::uniform_tensor({config_.horizon, m}, 1.0 / std::sqrt(double(m)), rng));
      mha_ = MultiHeadAttention(params_, "decoder.attention", m, config_.heads, rng);
      norm_ = LayerNorm(params_, "decoder.norm", m);
      break;
    case ModelKind::kLstm:
      dec_lstm_ = LstmCell(params_, "decoder.cell", k, m, rng);
      break;
    case ModelKind::kLstmAttn:
      additive_ = BahdanauAttention(params_, "decoder.attention", m, m, m, rng);
      dec_lstm_ = LstmCell(params_, "decoder.cell", k + m, m, rng);
      break;
    case ModelKind::kRnn:
      dec_rnn_ = RnnCell(params_, "decoder.cell", k, m, rng);
      break;
  }
  head_ = FfnHead(params_, "head", m, m, k, rng);
}

Tensor ForecastModel::forward(const Tensor& x, Rng* dropout_rng, AttentionMaps* attention) const {
  if (x.rank() != 3 || x.dim(1) != config_.input_len || x.dim(2) != config_.input_dim) {
    throw numerics::ShapeError("forecaster expects [B," + std::to_string(config_.input_len) + "," +
                               std::to_string(config_.input_dim) + "] input, got " + numerics::shape_str(x.shape()));
  }
  const DropoutCtx drop{config_.dropout, dropout_rng};
  const Encoded enc = encoder_(x, drop);
  if (config_.kind == ModelKind::kTft) return decode_tft(enc, x.dim(0), drop, attention);
  return decode_recurrent(enc, x.dim(0), drop, attention);
}

Tensor ForecastModel::decode_tft(const Encoded& enc, std::size_t batch, const DropoutCtx& drop,
                                 AttentionMaps* attention) const {
  const std::size_t m = config_.hidden, steps = config_.horizon;
  const Tensor learned = ops::broadcast_leading(queries_, {batch, steps, m});
  const Tensor q = ops::add(learned, repeat_steps(enc.h_final.back(), steps));
  Tensor weights;
  // Residual around the attention, then layer norm.
  const Tensor attended = drop.apply(mha_(q, enc.stacked(), enc.stacked(), attention ? &weights : nullptr));
  const Tensor context = norm_(ops::add(q, attended));
  if (attention) {
    attention->per_head = weights;
    const std::size_t h = config_.heads, tk = config_.input_len;
    std::vector<double> mean(batch * steps * tk, 0.0);
    auto w = weights.values();
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t hh = 0; hh < h; ++hh)
        for (std::size_t j = 0; j < steps * tk; ++j) mean[b * steps * tk + j] += w[(b * h + hh) * steps * tk + j] / h;
    attention->mean = Tensor({batch, steps, tk}, std::move(mean));
  }
  return head_(context, drop);
}

Tensor ForecastModel::decode_recurrent(const Encoded& enc, std::size_t batch, const DropoutCtx& drop,
                                       AttentionMaps* attention) const {
  const std::size_t k = config_.target_dim;
  Tensor h = enc.h_final.back();
  Tensor c = enc.c_final.empty() ? Tensor() : enc.c_final.back();
  Tensor prev = Tensor::zeros({batch, k});
  std::vector<Tensor> outputs;
  std::vector<Tensor> maps;
  for (std::size_t s = 0; s < config_.horizon; ++s) {
    switch (config_.kind) {
      case ModelKind::kRnn:
        h = dec_rnn_.step(prev, h);
        break;
      case ModelKind::kLstm:
        std::tie(h, c) = dec_lstm_.step(prev, h, c);
        break;
      case ModelKind::kLstmAttn: {
        Tensor alpha;
        const Tensor context = additive_(h, enc.outputs, &alpha);
        maps.push_back(alpha.detach());
        std::tie(h, c) = dec_lstm_.step(ops::concat({prev, context}), h, c);
        break;
      }
      case ModelKind::kTft:
        break;
    }
    prev = head_(h, drop);
    outputs.push_back(prev);
  }
  if (attention && !maps.empty()) attention->mean = stack_steps(maps);
  return stack_steps(outputs);
}

}  // namespace mobgen::forecaster
