#pragma once

#include "mobgen/numerics/rng.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::spatialgen {

using numerics::Tensor;

inline constexpr double kNormEps = 1e-8;

/// Per-sample, per-channel instance normalization of h [B,C,H,W] followed by
/// the affine map gamma * h_hat + beta, with gamma and beta [B,C].
Tensor adain(const Tensor& h, const Tensor& gamma, const Tensor& beta, double eps = kNormEps);

/// h + alpha * noise, alpha [C] broadcast over batch and space, noise shaped like h.
Tensor noise_inject(const Tensor& h, const Tensor& alpha, const Tensor& noise);
/// Same with noise drawn from N(0, 1).
Tensor noise_inject(const Tensor& h, const Tensor& alpha, numerics::Rng& rng);

/// Appends one channel holding the mean over (C,H,W) of the population std
/// across the batch: [B,C,H,W] -> [B,C+1,H,W].
Tensor minibatch_std(const Tensor& h);

/// Adds a per-channel bias [C] to x [B,C,H,W].
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

/// Flattens [B,...] to [B, rest].
Tensor flatten(const Tensor& x);

}  // namespace mobgen::spatialgen
