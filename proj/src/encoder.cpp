#include "laco/encoder.hpp"

#include <cmath>
#include <string>

#include "laco/data.hpp"
#include "laco/errors.hpp"
#include "laco/ops.hpp"

namespace laco {

std::vector<int> document_ids(const Instance& inst, const Vocab& vocab) {
  std::vector<int> ids;
  ids.reserve(inst.text.size());
  for (const auto& raw : inst.text) {
    std::string tok = normalize_token(raw);
    if (!tok.empty()) ids.push_back(vocab.word_id(tok));
  }
  return ids;
}

JointSequence pack(const Instance& inst, const Vocab& vocab, std::size_t max_len) {
  const auto n = static_cast<std::size_t>(vocab.num_labels());
  if (max_len < n + 3) {
    throw ConfigError("max_len " + std::to_string(max_len) + " cannot hold " + std::to_string(n) +
                      " labels plus [CLS] and two [SEP]");
  }
  std::vector<int> doc = document_ids(inst, vocab);
  const std::size_t budget = max_len - n - 3;
  if (doc.size() > budget) doc.resize(budget);

  JointSequence s;
  s.token_ids.push_back(Vocab::kCls);
  s.token_ids.insert(s.token_ids.end(), doc.begin(), doc.end());
  s.token_ids.push_back(Vocab::kSep);
  s.doc_span = {1, doc.size()};
  s.label_span = {doc.size() + 2, n};
  for (std::size_t i = 0; i < n; ++i) s.token_ids.push_back(vocab.label_id(static_cast<int>(i)));
  s.token_ids.push_back(Vocab::kSep);
  s.segment_ids.assign(s.token_ids.size(), 0);
  for (std::size_t i = s.label_span.begin; i < s.token_ids.size(); ++i) s.segment_ids[i] = 1;
  s.length = s.token_ids.size();
  return s;
}

JointSequence pack_document(const Instance& inst, const Vocab& vocab, std::size_t max_len) {
  if (max_len < 2) throw ConfigError("max_len must leave room for [CLS] and [SEP]");
  std::vector<int> doc = document_ids(inst, vocab);
  if (doc.size() > max_len - 2) doc.resize(max_len - 2);
  JointSequence s;
  s.token_ids.push_back(Vocab::kCls);
  s.token_ids.insert(s.token_ids.end(), doc.begin(), doc.end());
  s.token_ids.push_back(Vocab::kSep);
  s.doc_span = {1, doc.size()};
  s.label_span = {s.token_ids.size(), 0};
  s.segment_ids.assign(s.token_ids.size(), 0);
  s.length = s.token_ids.size();
  return s;
}

void pad_to(JointSequence& seq, std::size_t total) {
  while (seq.token_ids.size() < total) {
    seq.token_ids.push_back(Vocab::kPad);
    seq.segment_ids.push_back(0);
  }
}

Tensor random_normal(Shape shape, double std, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, std);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

EncoderParams add_encoder_params(ParameterStore& store, const EncoderConfig& c, std::mt19937_64& rng) {
  if (c.hidden <= 0 || c.heads <= 0 || c.hidden % c.heads != 0) {
    throw ConfigError("hidden size " + std::to_string(c.hidden) + " must be a positive multiple of heads " +
                      std::to_string(c.heads));
  }
  if (c.layers < 0 || c.ffn <= 0 || c.max_len <= 0 || c.vocab_size <= 0 || c.segments <= 0) {
    throw ConfigError("encoder sizes must be positive");
  }
  const auto k = static_cast<std::size_t>(c.hidden);
  const auto f = static_cast<std::size_t>(c.ffn);
  const double sd = c.init_std;
  EncoderParams p;
  p.config = c;
  p.token_embedding = store.add("encoder.token_embedding", random_normal({static_cast<std::size_t>(c.vocab_size), k}, sd, rng));
  p.position_embedding =
      store.add("encoder.position_embedding", random_normal({static_cast<std::size_t>(c.max_len), k}, sd, rng));
  p.segment_embedding =
      store.add("encoder.segment_embedding", random_normal({static_cast<std::size_t>(c.segments), k}, sd, rng));
  for (int l = 0; l < c.layers; ++l) {
    const std::string pre = "encoder.layer" + std::to_string(l) + ".";
    EncoderParams::Layer L{};
    L.wq = store.add(pre + "attn.query.weight", random_normal({k, k}, sd, rng));
    L.bq = store.add(pre + "attn.query.bias", Tensor({1, k}));
    L.wk = store.add(pre + "attn.key.weight", random_normal({k, k}, sd, rng));
    L.bk = store.add(pre + "attn.key.bias", Tensor({1, k}));
    L.wv = store.add(pre + "attn.value.weight", random_normal({k, k}, sd, rng));
    L.bv = store.add(pre + "attn.value.bias", Tensor({1, k}));
    L.wo = store.add(pre + "attn.output.weight", random_normal({k, k}, sd, rng));
    L.bo = store.add(pre + "attn.output.bias", Tensor({1, k}));
    L.ln1_scale = store.add(pre + "attn.norm.scale", Tensor({1, k}, 1.0));
    L.ln1_shift = store.add(pre + "attn.norm.shift", Tensor({1, k}));
    L.ff1_w = store.add(pre + "ffn.in.weight", random_normal({k, f}, sd, rng));
    L.ff1_b = store.add(pre + "ffn.in.bias", Tensor({1, f}));
    L.ff2_w = store.add(pre + "ffn.out.weight", random_normal({f, k}, sd, rng));
    L.ff2_b = store.add(pre + "ffn.out.bias", Tensor({1, k}));
    L.ln2_scale = store.add(pre + "ffn.norm.scale", Tensor({1, k}, 1.0));
    L.ln2_shift = store.add(pre + "ffn.norm.shift", Tensor({1, k}));
    p.layers.push_back(L);
  }
  return p;
}

namespace {

Var self_attention(Binding& bind, Var x, const EncoderParams::Layer& L, int heads,
                   const std::vector<unsigned char>& keep) {
  const std::size_t k = x.value().dim(1);
  const std::size_t d = k / static_cast<std::size_t>(heads);
  Var q = add(matmul(x, bind(L.wq)), bind(L.bq));
  Var kk = add(matmul(x, bind(L.wk)), bind(L.bk));
  Var v = add(matmul(x, bind(L.wv)), bind(L.bv));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Var> head_out;
  head_out.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const std::size_t off = static_cast<std::size_t>(h) * d;
    Var qh = heads == 1 ? q : slice_cols(q, off, d);
    Var kh = heads == 1 ? kk : slice_cols(kk, off, d);
    Var vh = heads == 1 ? v : slice_cols(v, off, d);
    Var weights = softmax_rows(scale(matmul_nt(qh, kh), inv_sqrt_d), keep);
    head_out.push_back(matmul(weights, vh));
  }
  Var merged = heads == 1 ? head_out[0] : concat_cols(head_out);
  return add(matmul(merged, bind(L.wo)), bind(L.bo));
}

}  // namespace

EncoderOutput encode(Binding& bind, const JointSequence& seq, const EncoderParams& p) {
  const std::size_t total = seq.token_ids.size();
  if (total > static_cast<std::size_t>(p.config.max_len)) {
    throw DimensionError("sequence of " + std::to_string(total) + " tokens exceeds max_len " +
                         std::to_string(p.config.max_len));
  }
  if (seq.segment_ids.size() != total) throw DimensionError("segment ids do not match token ids");
  for (int id : seq.segment_ids)
    if (id < 0 || id >= p.config.segments) throw DimensionError("segment id " + std::to_string(id) + " out of range");

  std::vector<int> positions(total);
  for (std::size_t i = 0; i < total; ++i) positions[i] = static_cast<int>(i);
  Var x = add(embedding(bind(p.token_embedding), seq.token_ids), embedding(bind(p.position_embedding), positions));
  x = add(x, embedding(bind(p.segment_embedding), seq.segment_ids));

  std::vector<unsigned char> keep(total, 0);
  for (std::size_t i = 0; i < seq.length && i < total; ++i) keep[i] = 1;

  for (const auto& L : p.layers) {
    Var attn = self_attention(bind, x, L, p.config.heads, keep);
    x = layer_norm(add(x, attn), bind(L.ln1_scale), bind(L.ln1_shift));
    Var ff = add(matmul(gelu(add(matmul(x, bind(L.ff1_w)), bind(L.ff1_b))), bind(L.ff2_w)), bind(L.ff2_b));
    x = layer_norm(add(x, ff), bind(L.ln2_scale), bind(L.ln2_shift));
  }

  EncoderOutput out;
  out.hidden = x;
  out.cls = slice_rows(x, 0, 1);
  out.doc = slice_rows(x, seq.doc_span.begin, seq.doc_span.size);
  if (seq.label_span.size > 0) out.labels = slice_rows(x, seq.label_span.begin, seq.label_span.size);
  return out;
}

}  // namespace laco
