#include "laco/mltc_head.hpp"

#include <algorithm>
#include <cmath>

#include "laco/encoder.hpp"
#include "laco/errors.hpp"
#include "laco/ops.hpp"

namespace laco {

CAParams add_ca_params(ParameterStore& store, const CAConfig& c, std::mt19937_64& rng) {
  if (c.num_labels <= 0 || c.hidden <= 0) throw ConfigError("classifier needs labels and a hidden size");
  if (c.attention && (c.window < 1 || c.filters < 1)) throw ConfigError("cross attention needs window >= 1 and filters >= 1");
  const auto n = static_cast<std::size_t>(c.num_labels);
  const auto k = static_cast<std::size_t>(c.hidden);
  CAParams p;
  p.has_attention = c.attention;
  if (c.attention) {
    p.window = static_cast<std::size_t>(c.window);
    p.pad_left = p.window / 2;
    const auto f = static_cast<std::size_t>(c.filters);
    p.filters = store.add("ca.conv.filters", random_normal({p.window * n, f}, c.init_std, rng));
    p.filter_bias = store.add("ca.conv.bias", Tensor({1, f}));
  }
  p.classifier_weight = store.add("classifier.weight", c.zero_init_classifier ? Tensor({n, k})
                                                                              : random_normal({n, k}, c.init_std, rng));
  p.classifier_bias = store.add("classifier.bias", Tensor({1, n}));
  return p;
}

Var compatibility(Var doc, Var labels) {
  if (doc.value().rank() != 2 || labels.value().rank() != 2 || doc.value().dim(1) != labels.value().dim(1)) {
    throw DimensionError("compatibility needs m x k and n x k, got " + shape_str(doc.shape()) + " and " +
                         shape_str(labels.shape()));
  }
  return matmul_nt(doc, labels);
}

AttentionResult cross_attention(Var compat, Var doc, Var filters, Var filter_bias, std::size_t window,
                                std::size_t pad_left) {
  const std::size_t m = doc.value().dim(0);
  const std::size_t k = doc.value().dim(1);
  if (compat.value().dim(0) != m) {
    throw DimensionError("compatibility rows " + shape_str(compat.shape()) + " do not match document " +
                         shape_str(doc.shape()));
  }
  AttentionResult r;
  if (m == 0) {
    r.degenerate = true;
    r.vector = doc.tape().constant(Tensor({1, k}));
    return r;
  }
  Var hidden = relu(conv1d(compat, window, pad_left, filters, filter_bias));  // m x F
  Var scores = tanh(max_pool_axis(hidden, 1));                                 // m
  r.weights = softmax_rows(reshape(scores, {1, m}));                           // 1 x m
  r.vector = matmul(r.weights, doc);                                           // 1 x k
  return r;
}

AttentionResult cross_attention(Binding& bind, Var compat, Var doc, const CAParams& p) {
  if (!p.has_attention) throw ConfigError("model was built without cross attention");
  return cross_attention(compat, doc, bind(p.filters), bind(p.filter_bias), p.window, p.pad_left);
}

Var label_probabilities(Var doc_vector, Var weight, Var bias) {
  Var c = doc_vector.value().rank() == 1 ? reshape(doc_vector, {1, doc_vector.value().size()}) : doc_vector;
  return sigmoid(add(matmul_nt(c, weight), bias));
}

Prediction threshold_prediction(std::span<const double> probs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  Prediction p;
  p.probs.assign(probs.begin(), probs.end());
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] >= threshold) p.predicted.push_back(static_cast<int>(i));
  return p;
}

Prediction predict(const Tensor& doc_vector, const Tensor& weight, const Tensor& bias, double threshold) {
  const std::size_t n = weight.rows(), k = weight.cols();
  if (doc_vector.size() != k || bias.size() != n) {
    throw DimensionError("predict: c " + shape_str(doc_vector.shape()) + ", weight " + shape_str(weight.shape()) +
                         ", bias " + shape_str(bias.shape()));
  }
  Tape tape;
  Var probs = label_probabilities(tape.constant(doc_vector.reshaped({1, k})), tape.constant(weight),
                                  tape.constant(bias.reshaped({1, n})));
  return threshold_prediction(probs.value().data(), threshold);
}

Var mlc_loss(Var probs, std::span<const double> gold) { return bce_sum(probs, gold); }

double mlc_loss(std::span<const double> probs, std::span<const double> gold) {
  Tape tape;
  return bce_sum(tape.constant(Tensor::vector({probs.begin(), probs.end()})), gold).value().item();
}

}  // namespace laco
