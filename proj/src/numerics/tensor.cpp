#include "mobgen/numerics/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "mobgen/numerics/ops.hpp"

namespace mobgen::numerics {

namespace {

thread_local bool g_grad_enabled = true;

void require_finite(std::span<const double> values, std::string_view op) {
  // Exponent bits all set means Inf or NaN. Branch-free so the scan vectorizes.
  constexpr std::uint64_t kExponent = 0x7ff0000000000000ULL;
  std::uint64_t bad = 0;
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    bad |= static_cast<std::uint64_t>((bits & kExponent) == kExponent);
  }
  if (bad) throw NumericError("non-finite value produced by " + std::string(op));
}

}  // namespace

std::size_t shape_numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor shape " + shape_str(shape) + " does not match " +
                     std::to_string(values.size()) + " values");
  }
  require_finite(values, "tensor construction");
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->data = std::make_shared<std::vector<double>>(std::move(values));
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
  if (!node_) throw AutogradError("use of undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::span<const double> Tensor::values() const {
  if (!node_) throw AutogradError("use of undefined tensor");
  return {node_->data->data(), node_->data->size()};
}

std::span<double> Tensor::mutable_values() {
  if (!node_) throw AutogradError("use of undefined tensor");
  if (node_->fn) throw AutogradError("in-place edit of a non-leaf tensor");
  return {node_->data->data(), node_->data->size()};
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  return values()[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  if (!node_) throw AutogradError("use of undefined tensor");
  if (node_->fn && !flag) throw AutogradError("cannot clear requires_grad on a non-leaf tensor");
  node_->requires_grad = flag;
  return *this;
}

bool Tensor::is_leaf() const { return node_ && !node_->fn; }

std::string_view Tensor::op_name() const { return node_ ? node_->op : std::string_view("undefined"); }

Tensor Tensor::grad() const {
  if (!node_) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad = Tensor();
}

Tensor Tensor::detach() const {
  auto node = std::make_shared<detail::Node>();
  node->shape = shape();
  node->data = std::make_shared<std::vector<double>>(*node_->data);
  return Tensor(std::move(node));
}

Tensor Tensor::reshape(Shape new_shape) const { return numerics::reshape(*this, std::move(new_shape)); }

Tensor Tensor::make_result(Shape shape, std::vector<double> values, std::string_view op,
                           std::vector<Tensor> inputs, BackwardFn backward) {
  require_finite(values, op);
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::make_shared<std::vector<double>>(std::move(values));
  node->op = op;
  bool track = false;
  if (g_grad_enabled) {
    for (const Tensor& in : inputs) track = track || in.requires_grad();
  }
  if (track) {
    node->requires_grad = true;
    node->fn = std::make_unique<detail::GradFn>(detail::GradFn{op, std::move(inputs), std::move(backward)});
  }
  return Tensor(std::move(node));
}

bool grad_enabled() noexcept { return g_grad_enabled; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(g_grad_enabled) { g_grad_enabled = enabled; }

GradModeGuard::~GradModeGuard() { g_grad_enabled = previous_; }

}  // namespace mobgen::numerics
