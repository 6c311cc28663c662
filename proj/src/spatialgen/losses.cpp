#include "mobgen/spatialgen/losses.hpp"

#include <cmath>

#include "mobgen/numerics/ops.hpp"

namespace mobgen::spatialgen {

namespace ops = numerics;

Tensor discriminator_objective(const Tensor& d_real, const Tensor& d_fake) {
  if (d_real.shape() != d_fake.shape()) {
    throw numerics::ShapeError("discriminator outputs differ in shape: " + numerics::shape_str(d_real.shape()) +
                               " vs " + numerics::shape_str(d_fake.shape()));
  }
  const Tensor real_term = ops::log(ops::add_scalar(d_real, kLogEps));
  const Tensor fake_term = ops::log(ops::add_scalar(ops::add_scalar(ops::neg(d_fake), 1.0), kLogEps));
  return ops::mean(ops::add(real_term, fake_term));
}

Tensor discriminator_loss(const Tensor& d_real, const Tensor& d_fake) {
  return ops::neg(discriminator_objective(d_real, d_fake));
}

Tensor generator_loss(const Tensor& d_fake) { return ops::neg(ops::mean(ops::log(ops::add_scalar(d_fake, kLogEps)))); }

namespace {

// d(sum of outputs)/d(input) with history kept; zero when the output ignores it.
Tensor input_grad(const Tensor& output, const Tensor& input) {
  if (!output.requires_grad()) return Tensor::zeros(input.shape());
  return numerics::grad(ops::sum(output), {input}, true)[0];
}

}  // namespace

Tensor per_sample_norm(const Tensor& x) {
  const Tensor flat = ops::reshape(x, {x.dim(0), x.numel() / x.dim(0)});
  return ops::sqrt(ops::sum_lastdim(ops::square(flat)));
}

Tensor gradient_penalty(const ScoreFn& score, const Tensor& real, const Tensor& fake, double lambda,
                        numerics::Rng& rng) {
  std::vector<double> u(real.dim(0));
  for (double& v : u) v = rng.uniform();
  return gradient_penalty(score, real, fake, lambda, u);
}

Tensor gradient_penalty(const ScoreFn& score, const Tensor& real, const Tensor& fake, double lambda,
                        const std::vector<double>& u) {
  if (real.shape() != fake.shape()) {
    throw numerics::ShapeError("gradient_penalty: real " + numerics::shape_str(real.shape()) + " vs fake " +
                               numerics::shape_str(fake.shape()));
  }
  if (u.size() != real.dim(0)) throw numerics::ShapeError("gradient_penalty: one interpolation weight per sample");
  const std::size_t per = real.numel() / real.dim(0);
  std::vector<double> mixed(real.numel());
  auto r = real.values(), f = fake.values();
  for (std::size_t b = 0; b < u.size(); ++b) {
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) mixed[i] = u[b] * r[i] + (1.0 - u[b]) * f[i];
  }
  const Tensor interp(real.shape(), std::move(mixed), true);
  const Tensor g = input_grad(score(interp), interp);
  return ops::scale(ops::mean(ops::square(ops::add_scalar(per_sample_norm(g), -1.0))), lambda);
}

Tensor r1_penalty(const ScoreFn& score, const Tensor& real, double gamma) {
  const Tensor x = real.detach().set_requires_grad(true);
  const Tensor g = input_grad(score(x), x);
  const Tensor flat = ops::reshape(g, {g.dim(0), g.numel() / g.dim(0)});
  return ops::scale(ops::mean(ops::sum_lastdim(ops::square(flat))), 0.5 * gamma);
}

Tensor PathLengthRegularizer::operator()(const Tensor& images, const Tensor& w, numerics::Rng& rng) {
  const double pixels = static_cast<double>(images.numel() / images.dim(0) / images.dim(1));
  Tensor y(images.shape(), rng.normal_vector(images.numel()));
  y = ops::scale(y, 1.0 / std::sqrt(pixels));
  const Tensor jt_y = input_grad(ops::mul(images, y), w);
  const Tensor lengths = per_sample_norm(jt_y);
  double avg = 0.0;
  for (double v : lengths.values()) avg += v;
  avg /= static_cast<double>(lengths.numel());
  const Tensor penalty = ops::scale(ops::mean(ops::square(ops::add_scalar(lengths, -mean_))), weight_);
  mean_ += (1.0 - decay_) * (avg - mean_);
  last_ = avg;
  return penalty;
}

}  // namespace mobgen::spatialgen
