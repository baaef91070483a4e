#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "laco/tensor.hpp"

namespace laco {

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  // Accumulated gradient; an all-zero tensor if nothing flowed here.
  Tensor grad() const;

  friend bool operator==(const Var& a, const Var& b) { return a.tape_ == b.tape_ && a.id_ == b.id_; }

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in execution order, so every node
/// comes after its inputs and the reverse pass is a single backwards sweep.
///
/// Parameter nodes borrow their value and accumulate their gradient directly
/// into a caller-owned sink, which avoids copying weight matrices per graph.
class Tape {
 public:
  // Receives the gradient of the node's output and pushes contributions into
  // the inputs via Tape::grad_of.
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Borrowed value; gradient accumulates into *grad_sink (same shape). A null
  // sink makes the node a constant.
  Var parameter(const Tensor& value, Tensor* grad_sink);

  // Used by ops. `needs_grad` should be true iff any input requires grad.
  Var record(Tensor value, bool needs_grad, Backward backward);

  const Tensor& value(std::uint32_t id) const;
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  const Tensor* grad_if_any(std::uint32_t id) const;
  // Mutable gradient buffer of a node, zero-allocated on first use.
  Tensor& grad_of(std::uint32_t id);

  // Seeds d(root)/d(root) = 1 (root must be a scalar) and sweeps backwards.
  void backward(Var root);
  // Same with an explicit seed of the root's shape.
  void backward(Var root, const Tensor& seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned_value;
    const Tensor* borrowed_value = nullptr;
    Tensor owned_grad;
    Tensor* grad_sink = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // stable addresses; values are handed out by reference
};

}  // namespace laco
