#pragma once

#include <cstdint>
#include <optional>

#include "laco/aux_tasks.hpp"
#include "laco/encoder.hpp"
#include "laco/mltc_head.hpp"
#include "laco/params.hpp"

namespace laco {

struct Instance;

struct ModelConfig {
  EncoderConfig encoder;  // vocab_size and segments are derived from the vocab and flags
  int window = 10;
  int filters = 64;
  // Ablations: no_je encodes the document alone and uses free label
  // embeddings; no_ca classifies from [CLS].
  bool no_je = false;
  bool no_ca = false;
  bool plcp_head = false;
  bool clcp_head = false;
  bool zero_init_heads = false;
};

struct ForwardResult {
  EncoderOutput encoded;
  Var label_reps;  // encoder label rows, or the free label table without joint embedding (invalid if unused)
  Var doc_vector;  // c, or h_cls without cross attention
  Var probs;       // 1 x n
  AttentionResult attention;
};

/// Encoder + classification head + optional auxiliary heads over one
/// ParameterStore.
class LacoModel {
 public:
  LacoModel(const ModelConfig& config, const Vocab& vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int num_labels() const { return num_labels_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const EncoderParams& encoder() const { return encoder_; }
  const CAParams& head() const { return head_; }
  const AuxParams& aux() const { return aux_; }
  std::optional<std::size_t> label_table() const { return label_table_; }

  // Joint packing, or document-only packing under no_je.
  JointSequence prepare(const Instance& inst, const Vocab& vocab) const;
  ForwardResult forward(Binding& bind, const JointSequence& seq) const;
  // Probabilities without recording gradients.
  std::vector<double> infer(const JointSequence& seq) const;

 private:
  ModelConfig config_;
  int num_labels_ = 0;
  ParameterStore params_;
  EncoderParams encoder_;
  CAParams head_;
  AuxParams aux_;
  std::optional<std::size_t> label_table_;
};

}  // namespace laco
