#pragma once

// Differentiable primitives. Every backward rule is itself written in terms
// of these ops, so gradients can be differentiated a second time.
//
// Broadcasting is limited to leading dimensions: in add/sub/mul/div the
// smaller operand's shape must equal a trailing suffix of the larger one.

#include <cstddef>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

class Rng;

// Linear algebra.
/// [n,k]x[k,m] -> [n,m]; [B,n,k]x[B,k,m] -> [B,n,m]; [...,k]x[k,m] -> [...,m].
Tensor matmul(const Tensor& a, const Tensor& b);
/// Swaps the last two dimensions of a rank-2 or rank-3 tensor.
Tensor transpose(const Tensor& a);

// Elementwise arithmetic.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);
Tensor neg(const Tensor& a);

// Unary maps.
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor exp(const Tensor& a);
/// Throws DomainError for any value <= 0.
Tensor log(const Tensor& a);
/// Throws DomainError for negative values. The derivative at exactly 0 is 0.
Tensor sqrt(const Tensor& a);
Tensor square(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
/// 1/x, with 0 mapped to 0.
Tensor reciprocal_or_zero(const Tensor& a);

// Reductions and their adjoint expansions.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Sum over the last dimension, kept as size 1.
Tensor sum_lastdim(const Tensor& a);
Tensor mean_lastdim(const Tensor& a);
/// [...,1] -> [...,n] by repetition.
Tensor expand_lastdim(const Tensor& a, std::size_t n);
/// Tiles `a` over the leading dims of `shape`; a.shape must be a suffix of shape.
Tensor broadcast_leading(const Tensor& a, const Shape& shape);
/// Adjoint of broadcast_leading: sums leading blocks down to `suffix`.
Tensor sum_leading(const Tensor& a, const Shape& suffix);
/// Population standard deviation of a rank-2 tensor along axis 0 or 1.
/// Result has the other axis' extent.
Tensor stddev(const Tensor& a, std::size_t axis);
/// Per-row softmax over the last dimension.
Tensor softmax(const Tensor& a);

// Structural.
/// Concatenates along the last dimension; leading dims must agree.
Tensor concat(const std::vector<Tensor>& parts);
/// Columns [begin, end) of the last dimension.
Tensor slice(const Tensor& a, std::size_t begin, std::size_t end);
/// Adjoint of slice: places `a` at [begin, begin+n) within a zero last dim of `width`.
Tensor embed_lastdim(const Tensor& a, std::size_t begin, std::size_t width);
Tensor reshape(const Tensor& a, Shape shape);

// Image ops on [B,C,H,W].
/// Zero-padded cross-correlation with weight [Co,Ci,k,k].
Tensor conv2d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t pad);
/// Adjoint of conv2d with respect to its input; output spatial size is given.
Tensor conv_transpose2d(const Tensor& y, const Tensor& weight, std::size_t stride,
                        std::size_t pad, std::size_t out_h, std::size_t out_w);
/// Adjoint of conv2d with respect to its weight.
Tensor conv2d_weight_grad(const Tensor& x, const Tensor& grad_y, std::size_t kernel,
                          std::size_t stride, std::size_t pad);
/// Nearest-neighbor x2 upsampling.
Tensor upsample2x(const Tensor& x);
/// Sum over non-overlapping 2x2 blocks (adjoint of upsample2x).
Tensor pool_sum2x(const Tensor& x);
/// [C] -> `shape` = [B,C,H,W] by repetition over B,H,W.
Tensor expand_channels(const Tensor& per_channel, const Shape& shape);
/// [B,C,H,W] -> [C] (adjoint of expand_channels).
Tensor channel_sum(const Tensor& x);

// Composites.
/// Inverted dropout; identity when p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng);
/// Elementwise 0.5e^2 if |e|<1 else |e|-0.5, averaged over all elements.
Tensor smooth_l1(const Tensor& prediction, const Tensor& target);

}  // namespace mobgen::numerics
