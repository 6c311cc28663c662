#pragma once

#include <functional>

#include "mobgen/numerics/rng.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::spatialgen {

using numerics::Tensor;

inline constexpr double kLogEps = 1e-8;

/// Maps an image batch [B,...] to pre-sigmoid scores [B,1] (or [B]).
using ScoreFn = std::function<Tensor(const Tensor& images)>;

/// Mean over pairs of log(D_real + eps) + log(1 - D_fake + eps): the quantity
/// the discriminator maximizes. Inputs are probabilities.
Tensor discriminator_objective(const Tensor& d_real, const Tensor& d_fake);
/// Negated objective, minimized by gradient descent.
Tensor discriminator_loss(const Tensor& d_real, const Tensor& d_fake);
/// Non-saturating generator loss -mean(log(D_fake + eps)).
Tensor generator_loss(const Tensor& d_fake);

/// lambda * mean_b (||grad_I score(I_hat)_b||_2 - 1)^2 with per-sample
/// interpolates I_hat = u real + (1 - u) fake, u ~ U(0,1).
Tensor gradient_penalty(const ScoreFn& score, const Tensor& real, const Tensor& fake, double lambda,
                        numerics::Rng& rng);
/// Same with caller-supplied interpolation weights u [B].
Tensor gradient_penalty(const ScoreFn& score, const Tensor& real, const Tensor& fake, double lambda,
                        const std::vector<double>& u);

/// (gamma / 2) * mean_b ||grad_I score(I_real)_b||^2.
Tensor r1_penalty(const ScoreFn& score, const Tensor& real, double gamma);

/// Lazy schedules: regularizers run on steps that are multiples of the interval.
inline bool regularize_now(std::size_t step, std::size_t interval) { return step % interval == 0; }

/// Path-length regularizer with an exponential running mean of the lengths.
class PathLengthRegularizer {
 public:
  explicit PathLengthRegularizer(double weight = 2.0, double decay = 0.99) : weight_(weight), decay_(decay) {}

  /// images = G(w). Draws a random image-space direction y, measures
  /// a_b = ||J_w^T y||_b per sample and returns weight * mean_b (a_b - mean)^2
  /// against the running mean before this step's update. The running mean then
  /// moves toward mean_b a_b: mean += (1 - decay) * (mean_b a_b - mean).
  Tensor operator()(const Tensor& images, const Tensor& w, numerics::Rng& rng);

  double running_mean() const { return mean_; }
  void set_running_mean(double value) { mean_ = value; }
  /// Mean path length measured by the last call.
  double last_length() const { return last_; }

 private:
  double weight_;
  double decay_;
  double mean_ = 0.0;
  double last_ = 0.0;
};

/// Per-sample L2 norm of a [B,...] tensor as [B,1].
Tensor per_sample_norm(const Tensor& x);

}  // namespace mobgen::spatialgen
