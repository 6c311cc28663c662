#include "mobgen/spatialgen/blocks.hpp"

#include "mobgen/numerics/ops.hpp"

namespace mobgen::spatialgen {

namespace ops = numerics;
using numerics::Shape;
using numerics::ShapeError;

namespace {

void require_image(const Tensor& h, const char* who) {
  if (h.rank() != 4) throw ShapeError(std::string(who) + ": expected [B,C,H,W], got " + numerics::shape_str(h.shape()));
}

}  // namespace

Tensor adain(const Tensor& h, const Tensor& gamma, const Tensor& beta, double eps) {
  require_image(h, "adain");
  const std::size_t b = h.dim(0), c = h.dim(1), hw = h.dim(2) * h.dim(3);
  const Shape style{b, c};
  if (gamma.shape() != style || beta.shape() != style) {
    throw ShapeError("adain: style shapes " + numerics::shape_str(gamma.shape()) + " and " +
                     numerics::shape_str(beta.shape()) + " do not match " + numerics::shape_str(style));
  }
  const Tensor rows = ops::reshape(h, {b * c, hw});
  const Tensor centred = ops::sub(rows, ops::expand_lastdim(ops::mean_lastdim(rows), hw));
  const Tensor sd = ops::sqrt(ops::add_scalar(ops::mean_lastdim(ops::square(centred)), eps));
  const Tensor normed = ops::div(centred, ops::expand_lastdim(sd, hw));
  const Tensor g = ops::expand_lastdim(ops::reshape(gamma, {b * c, 1}), hw);
  const Tensor bt = ops::expand_lastdim(ops::reshape(beta, {b * c, 1}), hw);
  return ops::reshape(ops::add(ops::mul(g, normed), bt), h.shape());
}

Tensor noise_inject(const Tensor& h, const Tensor& alpha, const Tensor& noise) {
  require_image(h, "noise_inject");
  if (noise.shape() != h.shape()) {
    throw ShapeError("noise_inject: noise " + numerics::shape_str(noise.shape()) + " vs features " +
                     numerics::shape_str(h.shape()));
  }
  return ops::add(h, ops::mul(ops::expand_channels(alpha, h.shape()), noise));
}

Tensor noise_inject(const Tensor& h, const Tensor& alpha, numerics::Rng& rng) {
  return noise_inject(h, alpha, Tensor(h.shape(), rng.normal_vector(h.numel())));
}

Tensor minibatch_std(const Tensor& h) {
  require_image(h, "minibatch_std");
  const std::size_t b = h.dim(0), c = h.dim(1), hw = h.dim(2) * h.dim(3);
  const Tensor flat = ops::reshape(h, {b, c * hw});
  const Tensor level = ops::mean(ops::stddev(flat, 0));
  const Tensor extra = ops::broadcast_leading(level, {b, hw});
  // Channels are outermost within a sample, so appending along the flattened
  // axis is a channel concatenation.
  return ops::reshape(ops::concat({flat, extra}), {b, c + 1, h.dim(2), h.dim(3)});
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  return ops::add(x, ops::expand_channels(bias, x.shape()));
}

Tensor flatten(const Tensor& x) {
  if (x.rank() == 0) throw ShapeError("flatten of a scalar");
  return ops::reshape(x, {x.dim(0), x.numel() / x.dim(0)});
}

}  // namespace mobgen::spatialgen
