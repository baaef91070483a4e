#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "laco/autograd.hpp"
#include "laco/params.hpp"
#include "laco/vocab.hpp"

namespace laco {

struct Instance;

struct Span {
  std::size_t begin = 0;
  std::size_t size = 0;
  std::size_t end() const { return begin + size; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Packed encoder input: [CLS] x_1..x_m [SEP] y_1..y_n [SEP], optionally
/// followed by [PAD]s. Segment 0 covers [CLS], the document and the first
/// [SEP]; segment 1 covers the labels and the final [SEP].
struct JointSequence {
  std::vector<int> token_ids;
  std::vector<int> segment_ids;
  Span doc_span;
  Span label_span;  // empty for document-only sequences
  std::size_t length = 0;  // positions >= length are padding

  friend bool operator==(const JointSequence&, const JointSequence&) = default;
};

// Document word ids after tokenization; unknown words map to [UNK].
std::vector<int> document_ids(const Instance& inst, const Vocab& vocab);

// Joint packing with every label of the vocabulary's label space. The
// document is truncated from the right so the label block always fits.
// Throws ConfigError if max_len < n + 3.
JointSequence pack(const Instance& inst, const Vocab& vocab, std::size_t max_len);
// [CLS] x_1..x_m [SEP] only, used when labels are not embedded jointly.
JointSequence pack_document(const Instance& inst, const Vocab& vocab, std::size_t max_len);
// Appends [PAD] tokens (segment 0) up to `total` positions.
void pad_to(JointSequence& seq, std::size_t total);

struct EncoderConfig {
  int layers = 2;
  int heads = 4;
  int hidden = 128;
  int ffn = 512;
  int max_len = 128;
  int vocab_size = 0;
  int segments = 2;
  double init_std = 0.02;
};

// Indices into a ParameterStore.
struct EncoderParams {
  struct Layer {
    std::size_t wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln1_scale, ln1_shift;
    std::size_t ff1_w, ff1_b, ff2_w, ff2_b;
    std::size_t ln2_scale, ln2_shift;
  };
  EncoderConfig config;
  std::size_t token_embedding = 0;
  std::size_t position_embedding = 0;
  std::size_t segment_embedding = 0;
  std::vector<Layer> layers;
};

// Registers encoder weights: N(0, init_std) matrices, zero biases, unit
// layer-norm scales. Throws ConfigError unless hidden % heads == 0.
EncoderParams add_encoder_params(ParameterStore& store, const EncoderConfig& config, std::mt19937_64& rng);

struct EncoderOutput {
  Var hidden;  // length x k, every position
  Var cls;     // 1 x k
  Var doc;     // m x k, document word rows
  Var labels;  // n x k, label token rows; invalid for document-only input
};

// Post-layer-norm transformer stack over a packed sequence. Padding keys get
// exactly zero attention weight.
EncoderOutput encode(Binding& bind, const JointSequence& seq, const EncoderParams& params);

// Normal(0, std) tensor drawn from rng in row-major order.
Tensor random_normal(Shape shape, double std, std::mt19937_64& rng);

}  // namespace laco
