#include "laco/params.hpp"

#include <stdexcept>

#include "laco/kernels.hpp"

namespace laco {

std::size_t ParameterStore::add(std::string name, Tensor value) {
  if (find(name)) throw std::logic_error("duplicate parameter name " + name);
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !(a[i].value == b[i].value)) return false;
  return true;
}

GradientSet zero_gradients(const ParameterStore& store) {
  GradientSet g;
  g.reserve(store.size());
  for (const auto& p : store) g.emplace_back(p.value.shape(), 0.0);
  return g;
}

void clear(GradientSet& grads) {
  for (auto& g : grads) g.fill(0.0);
}

void accumulate(GradientSet& dst, const GradientSet& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) kernels::axpy(1.0, src[i].data(), dst[i].data());
}

double squared_norm(const GradientSet& grads) {
  double s = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) s += v * v;
  return s;
}

Binding::Binding(Tape& tape, const ParameterStore& store, GradientSet* grads)
    : tape_(tape), store_(store), grads_(grads), bound_(store.size()) {
  if (grads_ && grads_->size() != store.size()) throw std::logic_error("gradient set does not match parameter store");
}

Var Binding::operator()(std::size_t index) {
  auto& slot = bound_.at(index);
  if (!slot) slot = tape_.parameter(store_[index].value, grads_ ? &(*grads_)[index] : nullptr);
  return *slot;
}

}  // namespace laco
