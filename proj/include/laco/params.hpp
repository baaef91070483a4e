#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "laco/autograd.hpp"
#include "laco/tensor.hpp"

namespace laco {

struct Parameter {
  std::string name;
  Tensor value;
};

/// Ordered, named collection of learnable tensors. Indices are stable and
/// serve as handles for modules, the optimizer and checkpoints.
class ParameterStore {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t scalar_count() const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::vector<Parameter> params_;
};

/// One gradient buffer per parameter, same order and shapes as the store.
using GradientSet = std::vector<Tensor>;

GradientSet zero_gradients(const ParameterStore& store);
void clear(GradientSet& grads);
// dst += src, element by element in index order.
void accumulate(GradientSet& dst, const GradientSet& src);
double squared_norm(const GradientSet& grads);

/// Lazily places parameters on a tape. With a null GradientSet every
/// parameter is bound as a constant (inference).
class Binding {
 public:
  Binding(Tape& tape, const ParameterStore& store, GradientSet* grads);

  Var operator()(std::size_t index);
  Tape& tape() { return tape_; }
  bool training() const { return grads_ != nullptr; }

 private:
  Tape& tape_;
  const ParameterStore& store_;
  GradientSet* grads_;
  std::vector<std::optional<Var>> bound_;
};

}  // namespace laco
