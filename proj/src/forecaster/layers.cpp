#include "mobgen/forecaster/layers.hpp"

#include <cmath>

#include "mobgen/numerics/ops.hpp"

namespace mobgen::forecaster {

namespace ops = numerics;
using numerics::Linear;
using numerics::ParameterSet;
using numerics::Rng;
using numerics::ShapeError;

LstmCell::LstmCell(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(hidden), gates_(params, prefix, in + hidden, 4 * hidden, rng) {}

std::pair<Tensor, Tensor> LstmCell::step(const Tensor& x, const Tensor& h, const Tensor& c) const {
  const std::size_t m = hidden_;
  const Tensor z = gates_(ops::concat({x, h}));
  const Tensor i = ops::sigmoid(ops::slice(z, 0, m));
  const Tensor f = ops::sigmoid(ops::slice(z, m, 2 * m));
  const Tensor g = ops::tanh(ops::slice(z, 2 * m, 3 * m));
  const Tensor o = ops::sigmoid(ops::slice(z, 3 * m, 4 * m));
  const Tensor c_next = ops::add(ops::mul(f, c), ops::mul(i, g));
  return {ops::mul(o, ops::tanh(c_next)), c_next};
}

RnnCell::RnnCell(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(hidden), linear_(params, prefix, in + hidden, hidden, rng) {}

Tensor RnnCell::step(const Tensor& x, const Tensor& h) const { return ops::tanh(linear_(ops::concat({x, h}))); }

LayerNorm::LayerNorm(ParameterSet& params, const std::string& prefix, std::size_t dim, double eps)
    : eps_(eps),
      gain_(params.add(prefix + ".gain", Tensor::full({dim}, 1.0))),
      bias_(params.add(prefix + ".bias", Tensor::zeros({dim}))) {}

Tensor LayerNorm::operator()(const Tensor& x) const {
  const std::size_t n = x.shape().back();
  const Tensor centred = ops::sub(x, ops::expand_lastdim(ops::mean_lastdim(x), n));
  const Tensor sd = ops::sqrt(ops::add_scalar(ops::mean_lastdim(ops::square(centred)), eps_));
  const Tensor normed = ops::div(centred, ops::expand_lastdim(sd, n));
  return ops::add(ops::mul(normed, ops::broadcast_leading(gain_, x.shape())), ops::broadcast_leading(bias_, x.shape()));
}

Tensor stack_steps(const std::vector<Tensor>& steps) {
  if (steps.empty()) throw ShapeError("stack_steps: no steps");
  const std::size_t b = steps[0].dim(0), m = steps[0].dim(1);
  return ops::reshape(ops::concat(steps), {b, steps.size(), m});
}

Tensor repeat_steps(const Tensor& x, std::size_t t) { return stack_steps(std::vector<Tensor>(t, x)); }

Tensor Encoded::stacked() const { return stack_steps(outputs); }

Tensor DropoutCtx::apply(const Tensor& x) const {
  if (!rng || p == 0.0) return x;
  return ops::dropout(x, p, *rng);
}

Encoder::Encoder(ParameterSet& params, const std::string& prefix, bool lstm, std::size_t in, std::size_t hidden,
                 std::size_t layers, Rng& rng)
    : lstm_(lstm), hidden_(hidden) {
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string name = prefix + ".layer" + std::to_string(l);
    const std::size_t width = l == 0 ? in : hidden;
    if (lstm) {
      lstm_cells_.emplace_back(params, name, width, hidden, rng);
    } else {
      rnn_cells_.emplace_back(params, name, width, hidden, rng);
    }
  }
}

Encoded Encoder::operator()(const Tensor& x, const DropoutCtx& dropout) const {
  if (x.rank() != 3 || x.dim(1) == 0) {
    throw ShapeError("encoder expects a non-empty [B,T,d] sequence, got " + numerics::shape_str(x.shape()));
  }
  const std::size_t b = x.dim(0), steps = x.dim(1), d = x.dim(2);
  const Tensor flat = ops::reshape(x, {b, steps * d});
  std::vector<Tensor> seq;
  for (std::size_t t = 0; t < steps; ++t) seq.push_back(ops::slice(flat, t * d, (t + 1) * d));

  Encoded out;
  for (std::size_t l = 0; l < layers(); ++l) {
    if (l > 0) {
      for (Tensor& s : seq) s = dropout.apply(s);
    }
    Tensor h = Tensor::zeros({b, hidden_});
    Tensor c = Tensor::zeros({b, hidden_});
    for (std::size_t t = 0; t < steps; ++t) {
      if (lstm_) {
        std::tie(h, c) = lstm_cells_[l].step(seq[t], h, c);
      } else {
        h = rnn_cells_[l].step(seq[t], h);
      }
      seq[t] = h;
    }
    out.h_final.push_back(h);
    if (lstm_) out.c_final.push_back(c);
  }
  out.outputs = std::move(seq);
  return out;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, Tensor* weights) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3 || q.dim(2) != k.dim(2) || k.dim(1) != v.dim(1) ||
      q.dim(0) != k.dim(0) || k.dim(0) != v.dim(0)) {
    throw ShapeError("scaled_dot_attention: incompatible Q " + numerics::shape_str(q.shape()) + ", K " +
                     numerics::shape_str(k.shape()) + ", V " + numerics::shape_str(v.shape()));
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.dim(2)));
  const Tensor w = ops::softmax(ops::scale(ops::matmul(q, ops::transpose(k)), inv));
  if (weights) *weights = w;
  return ops::matmul(w, v);
}

MultiHeadAttention::MultiHeadAttention(ParameterSet& params, const std::string& prefix, std::size_t model_dim,
                                       std::size_t heads, Rng& rng)
    : heads_(heads), model_dim_(model_dim) {
  if (heads == 0 || model_dim % heads != 0) {
    throw std::invalid_argument("model dimension " + std::to_string(model_dim) + " is not divisible by " +
                                std::to_string(heads) + " heads");
  }
  wq_ = Linear(params, prefix + ".wq", model_dim, model_dim, rng);
  wk_ = Linear(params, prefix + ".wk", model_dim, model_dim, rng);
  wv_ = Linear(params, prefix + ".wv", model_dim, model_dim, rng);
  wo_ = Linear(params, prefix + ".wo", model_dim, model_dim, rng);
}

Tensor MultiHeadAttention::operator()(const Tensor& queries, const Tensor& keys, const Tensor& values,
                                      Tensor* weights) const {
  if (queries.rank() != 3 || queries.dim(2) != model_dim_) {
    throw ShapeError("multi-head attention expects [B,Tq," + std::to_string(model_dim_) + "] queries, got " +
                     numerics::shape_str(queries.shape()));
  }
  const std::size_t dh = model_dim_ / heads_;
  const Tensor q = wq_(queries), k = wk_(keys), v = wv_(values);
  std::vector<Tensor> contexts;
  std::vector<Tensor> head_weights;
  for (std::size_t h = 0; h < heads_; ++h) {
    Tensor w;
    contexts.push_back(scaled_dot_attention(ops::slice(q, h * dh, (h + 1) * dh), ops::slice(k, h * dh, (h + 1) * dh),
                                            ops::slice(v, h * dh, (h + 1) * dh), weights ? &w : nullptr));
    if (weights) head_weights.push_back(w.detach());
  }
  if (weights) {
    const std::size_t b = queries.dim(0), tq = queries.dim(1), tk = keys.dim(1);
    std::vector<double> all(b * heads_ * tq * tk);
    for (std::size_t h = 0; h < heads_; ++h) {
      auto src = head_weights[h].values();
      for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < tq * tk; ++j) all[(i * heads_ + h) * tq * tk + j] = src[i * tq * tk + j];
    }
    *weights = Tensor({b, heads_, tq, tk}, std::move(all));
  }
  return wo_(ops::concat(contexts));
}

BahdanauAttention::BahdanauAttention(ParameterSet& params, const std::string& prefix, std::size_t query_dim,
                                     std::size_t key_dim, std::size_t attn_dim, Rng& rng)
    : w_query_(params, prefix + ".w_query", query_dim, attn_dim, rng),
      w_key_(params, prefix + ".w_key", key_dim, attn_dim, rng),
      v_(params, prefix + ".v", attn_dim, 1, rng) {}

Tensor BahdanauAttention::operator()(const Tensor& query, const std::vector<Tensor>& keys, Tensor* weights) const {
  if (keys.empty()) throw ShapeError("additive attention over an empty sequence");
  const Tensor q = w_query_(query);
  std::vector<Tensor> scores;
  for (const Tensor& key : keys) scores.push_back(v_(ops::tanh(ops::add(q, w_key_(key)))));
  const Tensor alpha = ops::softmax(ops::concat(scores));  // [B,T]
  if (weights) *weights = alpha;
  const std::size_t k = keys[0].dim(1);
  Tensor context;
  for (std::size_t t = 0; t < keys.size(); ++t) {
    const Tensor term = ops::mul(ops::expand_lastdim(ops::slice(alpha, t, t + 1), k), keys[t]);
    context = context.defined() ? ops::add(context, term) : term;
  }
  return context;
}

FfnHead::FfnHead(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t ff, std::size_t out,
                 Rng& rng)
    : w1_(params, prefix + ".w1", in, ff, rng), w2_(params, prefix + ".w2", ff, in, rng),
      w_out_(params, prefix + ".w_out", in, out, rng) {}

Tensor FfnHead::operator()(const Tensor& h, const DropoutCtx& dropout) const {
  return w_out_(w2_(dropout.apply(ops::relu(w1_(h)))));
}

}  // namespace mobgen::forecaster
