#pragma once

#include <cstdint>

#include "laco/config.hpp"
#include "laco/data.hpp"

namespace laco::testing {

// Small model that trains in well under a second per few steps.
inline RunConfig tiny_config() {
  RunConfig c;
  c.layers = 1;
  c.heads = 2;
  c.hidden = 16;
  c.ffn = 32;
  c.max_len = 48;
  c.filters = 8;
  c.batch_size = 8;
  c.learning_rate = 3e-3;
  c.max_steps = 20;
  c.eval_interval = 5;
  c.patience = 100;
  c.grad_slots = 4;
  return c;
}

// Synthetic corpus with `labels` labels; documents go to train and valid.
inline Corpus synthetic_corpus(int train_docs, int valid_docs, std::uint64_t seed, int labels = 8) {
  SynthSpec spec;
  spec.num_labels = labels;
  spec.train_docs = train_docs;
  spec.valid_docs = valid_docs;
  spec.test_docs = 0;
  spec.noise_tokens_per_doc = 3;
  return generate_synthetic(spec, seed).corpus;
}

}  // namespace laco::testing
