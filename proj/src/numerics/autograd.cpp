#include <unordered_map>
#include <unordered_set>

#include "mobgen/numerics/ops.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

namespace {

using NodePtr = std::shared_ptr<detail::Node>;

struct Plan {
  std::vector<NodePtr> order;                   // inputs before outputs
  std::unordered_set<detail::Node*> relevant;   // nodes on a path to a target
};

// Post-order DFS over history-carrying nodes. When `targets` is non-empty only
// nodes with a path to one of them are marked relevant; otherwise every node
// requiring grad is.
Plan plan_sweep(const NodePtr& root, const std::unordered_set<detail::Node*>& targets) {
  Plan plan;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<NodePtr, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_input] = stack.back();
    if (node->fn && next_input < node->fn->inputs.size()) {
      NodePtr child = node->fn->inputs[next_input++].node();
      if (child && child->requires_grad && visited.insert(child.get()).second) {
        stack.emplace_back(std::move(child), 0);
      }
      continue;
    }
    NodePtr done = node;
    stack.pop_back();
    bool keep = targets.empty() || targets.count(done.get()) > 0;
    if (!keep && done->fn) {
      for (const Tensor& in : done->fn->inputs) {
        if (plan.relevant.count(in.node().get())) {
          keep = true;
          break;
        }
      }
    }
    if (keep) plan.relevant.insert(done.get());
    plan.order.push_back(std::move(done));
  }
  return plan;
}

void check_scalar_output(const Tensor& out) {
  if (!out.defined()) throw AutogradError("backward on undefined tensor");
  if (out.numel() != 1) {
    throw AutogradError("backward requires a scalar loss, got shape " + shape_str(out.shape()));
  }
  if (!out.requires_grad()) {
    throw AutogradError("backward without a recorded graph: loss does not require grad");
  }
}

// Reverse pass in topological order. Returns the gradient reaching each node
// for which `capture` is true. Everything else is dropped once propagated.
template <typename Capture>
std::unordered_map<detail::Node*, Tensor> sweep(const Tensor& output, const Plan& plan,
                                                bool create_graph, Capture&& capture) {
  std::unordered_map<detail::Node*, Tensor> pending;
  std::unordered_map<detail::Node*, Tensor> captured;
  pending[output.node().get()] = Tensor::full(output.shape(), 1.0);
  GradModeGuard mode(create_graph);
  for (auto it = plan.order.rbegin(); it != plan.order.rend(); ++it) {
    const NodePtr& node = *it;
    auto found = pending.find(node.get());
    if (found == pending.end()) continue;
    const Tensor grad_out = found->second;
    pending.erase(found);
    if (capture(*node)) captured[node.get()] = grad_out;
    if (!node->fn) continue;
    const auto& inputs = node->fn->inputs;
    std::vector<bool> needed(inputs.size());
    bool any = false;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      needed[i] = inputs[i].requires_grad() && plan.relevant.count(inputs[i].node().get()) > 0;
      any = any || needed[i];
    }
    if (!any) continue;
    std::vector<Tensor> input_grads = node->fn->backward(grad_out, Tensor(node), needed);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (!needed[i] || !input_grads[i].defined()) continue;
      if (input_grads[i].shape() != inputs[i].shape()) {
        throw AutogradError("backward of " + std::string(node->fn->name) + " produced gradient " +
                            shape_str(input_grads[i].shape()) + " for input " +
                            shape_str(inputs[i].shape()));
      }
      Tensor& slot = pending[inputs[i].node().get()];
      slot = slot.defined() ? add(slot, input_grads[i]) : input_grads[i];
    }
  }
  return captured;
}

}  // namespace

void backward(const Tensor& loss) {
  check_scalar_output(loss);
  const Plan plan = plan_sweep(loss.node(), {});
  auto grads = sweep(loss, plan, false, [](const detail::Node& n) { return !n.fn; });
  for (const NodePtr& node : plan.order) {
    auto found = grads.find(node.get());
    if (found == grads.end()) continue;
    const Tensor& incoming = found->second;
    if (!node->grad.defined()) {
      node->grad = incoming.detach();
    } else {
      auto dst = node->grad.mutable_values();
      auto src = incoming.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
}

std::vector<Tensor> grad(const Tensor& output, const std::vector<Tensor>& inputs,
                         bool create_graph) {
  check_scalar_output(output);
  std::unordered_set<detail::Node*> targets;
  for (const Tensor& in : inputs) {
    if (!in.defined()) throw AutogradError("grad with respect to undefined tensor");
    targets.insert(in.node().get());
  }
  const Plan plan = plan_sweep(output.node(), targets);
  auto captured = sweep(output, plan, create_graph,
                        [&](const detail::Node& n) { return targets.count(const_cast<detail::Node*>(&n)) > 0; });
  std::vector<Tensor> result;
  result.reserve(inputs.size());
  for (const Tensor& in : inputs) {
    auto found = captured.find(in.node().get());
    result.push_back(found != captured.end() ? found->second : Tensor::zeros(in.shape()));
  }
  return result;
}

}  // namespace mobgen::numerics
