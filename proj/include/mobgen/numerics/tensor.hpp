#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mobgen::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape) noexcept;
std::string shape_str(const Shape& shape);

/// Operand shapes do not conform. The message names every shape involved.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// log/sqrt (and friends) applied outside their domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A forward op produced NaN or Inf, or a non-finite value was fed in.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misuse of the gradient machinery (non-scalar loss, nothing recorded, ...).
class AutogradError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Tensor;

namespace detail {
struct Node;
}  // namespace detail

/// Computes input gradients from the output gradient. `out` is the op's own
/// result, passed in (rather than captured) so the graph holds no cycles.
/// `needed[i]` is false when input i's gradient will be discarded; the rule
/// may then return an undefined tensor in that slot.
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& grad_out, const Tensor& out,
                                                     const std::vector<bool>& needed)>;

/// Dense row-major array of doubles with optional gradient tracking.
///
/// Tensor is a cheap handle; copies alias the same storage. Values are
/// immutable once an op has produced them. Leaves (parameters, inputs) may be
/// edited in place through mutable_values(), which optimizers rely on.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::size_t flat_index) const { return values()[flat_index]; }

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);
  bool is_leaf() const;
  std::string_view op_name() const;

  /// Accumulated gradient of a leaf after backward(); undefined if none.
  Tensor grad() const;
  void zero_grad();

  /// Copy of the values with no history.
  Tensor detach() const;
  /// Same values, new shape. Records history so gradients flow back.
  Tensor reshape(Shape shape) const;

  bool same_node(const Tensor& other) const noexcept { return node_ == other.node_; }

  // Engine internals.
  static Tensor make_result(Shape shape, std::vector<double> values, std::string_view op,
                            std::vector<Tensor> inputs, BackwardFn backward);
  std::shared_ptr<detail::Node> node() const noexcept { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

struct GradFn {
  std::string_view name;
  std::vector<Tensor> inputs;
  BackwardFn backward;
};

struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  Tensor grad;
  bool requires_grad = false;
  std::unique_ptr<GradFn> fn;
  std::string_view op = "leaf";
};

}  // namespace detail

/// Whether newly created ops record history (thread-local, default on).
bool grad_enabled() noexcept;

class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

class NoGradGuard : public GradModeGuard {
 public:
  NoGradGuard() : GradModeGuard(false) {}
};

/// Reverse pass from a scalar loss. Gradients accumulate into the .grad()
/// of every requires_grad leaf reachable from `loss`, additively across calls.
void backward(const Tensor& loss);

/// Gradients of a scalar `output` with respect to `inputs`, returned rather
/// than accumulated. With create_graph the returned tensors carry history and
/// can be differentiated again (used by the gradient penalties). Inputs the
/// output does not depend on get zero tensors.
std::vector<Tensor> grad(const Tensor& output, const std::vector<Tensor>& inputs,
                         bool create_graph = false);

}  // namespace mobgen::numerics
