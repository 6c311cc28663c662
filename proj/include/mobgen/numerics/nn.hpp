#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mobgen/numerics/rng.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

/// Ordered collection of named trainable tensors. Insertion order is the
/// checkpoint and optimizer order.
class ParameterSet {
 public:
  /// Registers `value` as a requires_grad leaf under `name` and returns it.
  Tensor add(const std::string& name, Tensor value);

  const std::vector<std::pair<std::string, Tensor>>& items() const noexcept { return items_; }
  std::vector<Tensor> tensors() const;
  Tensor get(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// Total number of scalars.
  std::size_t scalar_count() const;
  void zero_grad();
  /// Freezes (false) or unfreezes (true) every parameter.
  void set_requires_grad(bool flag);

  /// Overwrites values from a list of (name, tensor) pairs. Names and shapes
  /// must match exactly; CompatError otherwise.
  void assign(const std::vector<std::pair<std::string, Tensor>>& values);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

/// Tensor with entries drawn from U(-bound, bound).
Tensor uniform_tensor(const Shape& shape, double bound, Rng& rng);

/// Tensor with entries drawn from N(0, sd^2).
Tensor normal_tensor(const Shape& shape, double sd, Rng& rng);

/// Affine map y = x W + b acting on the last dimension. W is [in, out].
class Linear {
 public:
  Linear() = default;
  /// Registers "<prefix>.weight" and "<prefix>.bias", both U(+-1/sqrt(in)).
  Linear(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);

  Tensor operator()(const Tensor& x) const;

  std::size_t in_features() const { return weight_.dim(0); }
  std::size_t out_features() const { return weight_.dim(1); }
  const Tensor& weight() const { return weight_; }
  const Tensor& bias() const { return bias_; }

 private:
  Tensor weight_;
  Tensor bias_;
};

}  // namespace mobgen::numerics
