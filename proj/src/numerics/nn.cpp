#include "mobgen/numerics/nn.hpp"

#include <cmath>

#include "mobgen/errors.hpp"
#include "mobgen/numerics/ops.hpp"

namespace mobgen::numerics {

Tensor ParameterSet::add(const std::string& name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  items_.emplace_back(name, value);
  return value;
}

std::vector<Tensor> ParameterSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& [name, t] : items_) out.push_back(t);
  return out;
}

Tensor ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw std::out_of_range("no parameter named " + name);
}

bool ParameterSet::contains(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

void ParameterSet::set_requires_grad(bool flag) {
  for (auto& [name, t] : items_) t.set_requires_grad(flag);
}

void ParameterSet::assign(const std::vector<std::pair<std::string, Tensor>>& values) {
  if (values.size() != items_.size()) {
    throw CompatError("parameter count mismatch: expected " + std::to_string(items_.size()) + ", got " +
                      std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    auto& [name, dst] = items_[i];
    const auto& [src_name, src] = values[i];
    if (name != src_name) throw CompatError("parameter name mismatch: expected " + name + ", got " + src_name);
    if (dst.shape() != src.shape()) {
      throw CompatError("parameter " + name + " has shape " + shape_str(src.shape()) + ", expected " +
                        shape_str(dst.shape()));
    }
    auto out = dst.mutable_values();
    auto in = src.values();
    std::copy(in.begin(), in.end(), out.begin());
  }
}

Tensor uniform_tensor(const Shape& shape, double bound, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor(shape, std::move(v));
}

Tensor normal_tensor(const Shape& shape, double sd, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.normal(0.0, sd);
  return Tensor(shape, std::move(v));
}

Linear::Linear(ParameterSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = params.add(prefix + ".weight", uniform_tensor({in, out}, bound, rng));
  bias_ = params.add(prefix + ".bias", uniform_tensor({out}, bound, rng));
}

Tensor Linear::operator()(const Tensor& x) const { return add(matmul(x, weight_), bias_); }

}  // namespace mobgen::numerics
