#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "laco/autograd.hpp"
#include "laco/params.hpp"

namespace laco {

/// Indices of the document-label cross attention and classifier weights.
/// has_attention is false for models that classify from [CLS] directly.
struct CAParams {
  bool has_attention = true;
  std::size_t window = 10;
  std::size_t pad_left = 5;
  std::size_t filters = 0;      // (window * n) x F
  std::size_t filter_bias = 0;  // 1 x F
  std::size_t classifier_weight = 0;  // n x k
  std::size_t classifier_bias = 0;    // 1 x n
};

struct CAConfig {
  int num_labels = 0;
  int hidden = 128;
  int window = 10;
  int filters = 64;
  bool attention = true;
  double init_std = 0.02;
  bool zero_init_classifier = false;
};

CAParams add_ca_params(ParameterStore& store, const CAConfig& config, std::mt19937_64& rng);

// doc * labels^T  (m x n word-label dot products)
Var compatibility(Var doc, Var labels);

struct AttentionResult {
  Var vector;  // 1 x k document representation c
  Var weights;  // 1 x m distribution over words; invalid when degenerate
  bool degenerate = false;  // empty document: c is the zero vector
};

// Conv over word-centred blocks of M with ReLU, max over filters, tanh,
// softmax over words, then the weighted sum of document rows.
AttentionResult cross_attention(Var compat, Var doc, Var filters, Var filter_bias, std::size_t window,
                                std::size_t pad_left);
AttentionResult cross_attention(Binding& bind, Var compat, Var doc, const CAParams& params);

// sigmoid(c weight^T + bias) as a 1 x n row.
Var label_probabilities(Var doc_vector, Var weight, Var bias);

struct Prediction {
  std::vector<double> probs;
  std::vector<int> predicted;  // ascending label indices with prob >= threshold
};

Prediction threshold_prediction(std::span<const double> probs, double threshold);
// Plain-tensor prediction: c is 1 x k (or k), weight n x k, bias n.
Prediction predict(const Tensor& doc_vector, const Tensor& weight, const Tensor& bias, double threshold);

// Summed binary cross-entropy over labels.
Var mlc_loss(Var probs, std::span<const double> gold);
double mlc_loss(std::span<const double> probs, std::span<const double> gold);

}  // namespace laco
