#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mobgen/numerics/nn.hpp"
#include "mobgen/numerics/rng.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::forecaster {

using numerics::Tensor;

/// Standard LSTM cell. One fused [in + hidden, 4 hidden] matrix holds the
/// input, forget, candidate and output gate weights in that order.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(numerics::ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
           numerics::Rng& rng);
  /// x [B,in], h and c [B,hidden] -> (h', c').
  std::pair<Tensor, Tensor> step(const Tensor& x, const Tensor& h, const Tensor& c) const;
  std::size_t hidden() const { return hidden_; }
  const numerics::Linear& gates() const { return gates_; }

 private:
  std::size_t hidden_ = 0;
  numerics::Linear gates_;
};

/// Elman cell h' = tanh(W [x, h] + b).
class RnnCell {
 public:
  RnnCell() = default;
  RnnCell(numerics::ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden,
          numerics::Rng& rng);
  Tensor step(const Tensor& x, const Tensor& h) const;
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t hidden_ = 0;
  numerics::Linear linear_;
};

/// Per-step outputs of the top layer plus final states of every layer.
struct Encoded {
  std::vector<Tensor> outputs;  // T entries, each [B,hidden]
  std::vector<Tensor> h_final;  // per layer
  std::vector<Tensor> c_final;  // per layer (empty for RNN)

  /// Outputs stacked to [B,T,hidden].
  Tensor stacked() const;
};

/// Dropout settings for one forward pass; inactive when rng is null.
struct DropoutCtx {
  double p = 0.0;
  numerics::Rng* rng = nullptr;
  Tensor apply(const Tensor& x) const;
};

/// Stacked recurrent encoder over x [B,T,d]; dropout between layers.
class Encoder {
 public:
  Encoder() = default;
  Encoder(numerics::ParameterSet& params, const std::string& prefix, bool lstm, std::size_t in, std::size_t hidden,
          std::size_t layers, numerics::Rng& rng);
  Encoded operator()(const Tensor& x, const DropoutCtx& dropout = {}) const;
  std::size_t hidden() const { return hidden_; }
  std::size_t layers() const { return lstm_ ? lstm_cells_.size() : rnn_cells_.size(); }
  const std::vector<LstmCell>& lstm_cells() const { return lstm_cells_; }

 private:
  bool lstm_ = true;
  std::size_t hidden_ = 0;
  std::vector<LstmCell> lstm_cells_;
  std::vector<RnnCell> rnn_cells_;
};

/// softmax(Q K^T / sqrt(d_h)) V over Q [B,Tq,dh], K [B,Tk,dh], V [B,Tk,dv].
/// The attention weights [B,Tq,Tk] are written to *weights when given.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, Tensor* weights = nullptr);

/// Multi-head attention: per-head projections of width model_dim / heads,
/// scaled dot-product attention per head, concatenation, output projection W^O.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  /// invalid_argument when model_dim is not divisible by heads.
  MultiHeadAttention(numerics::ParameterSet& params, const std::string& prefix, std::size_t model_dim,
                     std::size_t heads, numerics::Rng& rng);
  /// queries [B,Tq,m], keys/values [B,Tk,m] -> [B,Tq,m]. Per-head weights
  /// [B,heads,Tq,Tk] are written to *weights when given.
  Tensor operator()(const Tensor& queries, const Tensor& keys, const Tensor& values, Tensor* weights = nullptr) const;
  std::size_t heads() const { return heads_; }
  const numerics::Linear& wq() const { return wq_; }
  const numerics::Linear& wk() const { return wk_; }
  const numerics::Linear& wv() const { return wv_; }
  const numerics::Linear& wo() const { return wo_; }

 private:
  std::size_t heads_ = 1;
  std::size_t model_dim_ = 0;
  numerics::Linear wq_, wk_, wv_, wo_;
};

/// Additive attention: score_t = v^T tanh(W1 h_dec + W2 h_enc,t).
class BahdanauAttention {
 public:
  BahdanauAttention() = default;
  BahdanauAttention(numerics::ParameterSet& params, const std::string& prefix, std::size_t query_dim,
                    std::size_t key_dim, std::size_t attn_dim, numerics::Rng& rng);
  /// query [B,q], encoder outputs T x [B,k] -> context [B,k]; weights [B,T] to *weights.
  Tensor operator()(const Tensor& query, const std::vector<Tensor>& keys, Tensor* weights = nullptr) const;

 private:
  numerics::Linear w_query_;
  numerics::Linear w_key_;
  numerics::Linear v_;
};

/// y = W_out (W2 relu(W1 h + b1) + b2) + b_out, dropout after the relu.
class FfnHead {
 public:
  FfnHead() = default;
  FfnHead(numerics::ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t ff,
          std::size_t out, numerics::Rng& rng);
  Tensor operator()(const Tensor& h, const DropoutCtx& dropout = {}) const;
  const numerics::Linear& layer1() const { return w1_; }
  const numerics::Linear& layer2() const { return w2_; }
  const numerics::Linear& output() const { return w_out_; }

 private:
  numerics::Linear w1_, w2_, w_out_;
};

/// Normalizes the last dimension to zero mean and unit variance, then applies
/// a learned per-feature gain (init 1) and bias (init 0).
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(numerics::ParameterSet& params, const std::string& prefix, std::size_t dim, double eps = 1e-5);
  Tensor operator()(const Tensor& x) const;

 private:
  double eps_ = 1e-5;
  Tensor gain_, bias_;
};

/// Stacks T tensors [B,m] into [B,T,m].
Tensor stack_steps(const std::vector<Tensor>& steps);
/// Repeats x [B,m] into [B,T,m].
Tensor repeat_steps(const Tensor& x, std::size_t t);

}  // namespace mobgen::forecaster
