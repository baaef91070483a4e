#include "laco/autograd.hpp"

#include "laco/errors.hpp"

namespace laco {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Tensor Var::grad() const {
  if (const Tensor* g = tape_->grad_if_any(id_)) return *g;
  return Tensor(value().shape(), 0.0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned_value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.owned_value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const Tensor& value, Tensor* grad_sink) {
  if (grad_sink && grad_sink->shape() != value.shape()) {
    throw DimensionError("gradient sink " + shape_str(grad_sink->shape()) + " does not match parameter " +
                         shape_str(value.shape()));
  }
  Node n;
  n.borrowed_value = &value;
  n.grad_sink = grad_sink;
  n.requires_grad = grad_sink != nullptr;
  return push(std::move(n));
}

Var Tape::record(Tensor value, bool needs_grad, Backward backward) {
  Node n;
  n.owned_value = std::move(value);
  n.requires_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  return n.borrowed_value ? *n.borrowed_value : n.owned_value;
}

const Tensor* Tape::grad_if_any(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.grad_sink) return n.grad_sink;
  if (!n.owned_grad.empty()) return &n.owned_grad;
  return nullptr;
}

Tensor& Tape::grad_of(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad_sink) return *n.grad_sink;
  if (n.owned_grad.empty() && !value(id).empty()) n.owned_grad = Tensor(value(id).shape(), 0.0);
  return n.owned_grad;
}

void Tape::backward(Var root) {
  if (root.value().size() != 1) {
    throw DimensionError("backward() without seed needs a scalar root, got " + shape_str(root.shape()));
  }
  backward(root, Tensor(root.shape(), 1.0));
}

void Tape::backward(Var root, const Tensor& seed) {
  if (&root.tape() != this) throw std::logic_error("backward on a Var from another tape");
  if (seed.shape() != root.shape()) {
    throw DimensionError("seed " + shape_str(seed.shape()) + " does not match root " + shape_str(root.shape()));
  }
  if (!requires_grad(root.id())) return;
  Tensor& g = grad_of(root.id());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.owned_grad.empty()) continue;
    // Ops receive a stable reference: grad_of() on parents never touches this node.
    n.backward(*this, n.owned_grad);
  }
}

}  // namespace laco
