#include "mobgen/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobgen/numerics/rng.hpp"

namespace mobgen::numerics {

namespace {

void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw std::invalid_argument("grad_check: eps must lie in [1e-7, 1e-3]");
  }
}

double evaluate(const std::function<Tensor()>& f) {
  const Tensor y = f();
  if (y.numel() != 1) throw AutogradError("grad_check: function must return a scalar, got " + shape_str(y.shape()));
  const double v = y.item();
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
  return v;
}

}  // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  Tensor leaf = x.detach().set_requires_grad(true);
  GradCheckOptions options;
  options.eps = eps;
  return grad_check([&] { return f(leaf); }, {leaf}, options);
}

double grad_check(const std::function<Tensor()>& f, const std::vector<Tensor>& leaves,
                  const GradCheckOptions& options) {
  check_eps(options.eps);
  std::vector<Tensor> inputs = leaves;
  for (Tensor& t : inputs) {
    if (!t.is_leaf() || !t.requires_grad()) throw AutogradError("grad_check: leaves must be requires_grad leaves");
  }
  std::vector<Tensor> analytic;
  {
    GradModeGuard enable(true);
    const Tensor y = f();
    if (y.numel() != 1) throw AutogradError("grad_check: function must return a scalar");
    if (!std::isfinite(y.item())) throw NumericError("grad_check: non-finite function value");
    analytic = grad(y, inputs);
  }
  Rng rng(options.seed);
  double worst = 0.0;
  GradModeGuard enable(true);  // f may itself call grad()
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    Tensor& leaf = inputs[l];
    const std::size_t n = leaf.numel();
    std::vector<std::size_t> components;
    if (options.max_components_per_leaf == 0 || options.max_components_per_leaf >= n) {
      for (std::size_t i = 0; i < n; ++i) components.push_back(i);
    } else {
      std::vector<std::size_t> perm = rng.permutation(n);
      components.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(options.max_components_per_leaf));
    }
    auto values = leaf.mutable_values();
    for (std::size_t i : components) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double up = evaluate(f);
      values[i] = original - options.eps;
      const double down = evaluate(f);
      values[i] = original;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[l][i];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
    }
  }
  return worst;
}

}  // namespace mobgen::numerics
