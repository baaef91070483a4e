#include "laco/model.hpp"

#include <random>

#include "laco/errors.hpp"

namespace laco {

LacoModel::LacoModel(const ModelConfig& config, const Vocab& vocab, std::uint64_t seed)
    : config_(config), num_labels_(vocab.num_labels()) {
  std::mt19937_64 rng(seed);
  EncoderConfig ec = config.encoder;
  // Without joint embedding the encoder never sees label tokens (they sit at
  // the end of the vocabulary) and has a single segment.
  ec.vocab_size = config.no_je ? vocab.first_label_id() : vocab.size();
  ec.segments = config.no_je ? 1 : 2;
  config_.encoder = ec;
  encoder_ = add_encoder_params(params_, ec, rng);
  // Free label embeddings only exist when something reads them; without
  // cross attention or auxiliary heads the model is a plain [CLS] classifier.
  if (config.no_je && (!config.no_ca || config.plcp_head || config.clcp_head)) {
    label_table_ = params_.add(
        "label_embedding", random_normal({static_cast<std::size_t>(num_labels_), static_cast<std::size_t>(ec.hidden)},
                                         ec.init_std, rng));
  }
  CAConfig cc;
  cc.num_labels = num_labels_;
  cc.hidden = ec.hidden;
  cc.window = config.window;
  cc.filters = config.filters;
  cc.attention = !config.no_ca;
  cc.init_std = ec.init_std;
  cc.zero_init_classifier = config.zero_init_heads;
  head_ = add_ca_params(params_, cc, rng);
  aux_ = add_aux_params(params_, ec.hidden, config.plcp_head, config.clcp_head, ec.init_std, config.zero_init_heads, rng);
}

JointSequence LacoModel::prepare(const Instance& inst, const Vocab& vocab) const {
  if (vocab.num_labels() != num_labels_) throw DataError("vocabulary label space does not match the model");
  const auto max_len = static_cast<std::size_t>(config_.encoder.max_len);
  return config_.no_je ? pack_document(inst, vocab, max_len) : pack(inst, vocab, max_len);
}

ForwardResult LacoModel::forward(Binding& bind, const JointSequence& seq) const {
  ForwardResult r;
  r.encoded = encode(bind, seq, encoder_);
  if (config_.no_je) {
    if (label_table_) r.label_reps = bind(*label_table_);
  } else {
    if (seq.label_span.size != static_cast<std::size_t>(num_labels_)) {
      throw DimensionError("sequence carries " + std::to_string(seq.label_span.size) + " label tokens, model has " +
                           std::to_string(num_labels_) + " labels");
    }
    r.label_reps = r.encoded.labels;
  }
  if (head_.has_attention) {
    Var compat = compatibility(r.encoded.doc, r.label_reps);
    r.attention = cross_attention(bind, compat, r.encoded.doc, head_);
    r.doc_vector = r.attention.vector;
  } else {
    r.doc_vector = r.encoded.cls;
  }
  r.probs = label_probabilities(r.doc_vector, bind(head_.classifier_weight), bind(head_.classifier_bias));
  return r;
}

std::vector<double> LacoModel::infer(const JointSequence& seq) const {
  Tape tape;
  Binding bind(tape, params_, nullptr);
  ForwardResult r = forward(bind, seq);
  const auto d = r.probs.value().data();
  return {d.begin(), d.end()};
}

}  // namespace laco
