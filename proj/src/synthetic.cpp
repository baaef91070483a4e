#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>

#include "laco/data.hpp"
#include "laco/errors.hpp"

namespace laco {

namespace {

std::string label_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "l%02d", i);
  return buf;
}

std::string keyword(int label, int j) { return label_name(label) + "w" + std::to_string(j); }
std::string noise_word(int j) { return "n" + std::to_string(j); }

void check_spec(const SynthSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.num_labels);
  if (spec.num_labels < 1 || spec.num_labels > 99) throw ConfigError("synthetic num_labels must be in [1, 99]");
  if (!spec.anchor_weights.empty() && spec.anchor_weights.size() != n) {
    throw ConfigError("anchor_weights needs one entry per label");
  }
  if (!spec.affinity.empty() && spec.affinity.size() != n * n) throw ConfigError("affinity must be n x n");
  for (double a : spec.affinity)
    if (a < 0.0 || a > 1.0) throw ConfigError("affinities must lie in [0, 1]");
  if (spec.keywords_per_label < 1 || spec.keyword_tokens_per_label < 0 || spec.noise_vocab < 1) {
    throw ConfigError("synthetic vocabulary sizes must be positive");
  }
  if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0) throw ConfigError("noise_rate must lie in [0, 1]");
}

}  // namespace

std::vector<double> planted_affinity(int num_labels) {
  const auto n = static_cast<std::size_t>(num_labels);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && i / 4 == j / 4) a[i * n + j] = 0.5;
  return a;
}

std::vector<double> anchor_profile(const SynthSpec& spec) {
  std::vector<double> w = spec.anchor_weights;
  if (w.empty()) {
    for (int r = 1; r <= spec.num_labels; ++r) w.push_back(std::pow(static_cast<double>(r), -spec.power_law_exponent));
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw ConfigError("anchor weights must have a positive sum");
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> generative_cooccurrence(const SynthSpec& spec) {
  check_spec(spec);
  const auto n = static_cast<std::size_t>(spec.num_labels);
  const std::vector<double> pi = anchor_profile(spec);
  const std::vector<double> aff = spec.affinity.empty() ? planted_affinity(spec.num_labels) : spec.affinity;
  // P(label i in set | anchor a): 1 if i == a, otherwise affinity(a, i); draws are independent given a.
  auto member = [&](std::size_t a, std::size_t i) { return a == i ? 1.0 : aff[a * n + i]; };
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0;
      for (std::size_t a = 0; a < n; ++a) p += pi[a] * (i == j ? member(a, i) : member(a, i) * member(a, j));
      table[i * n + j] = p;
    }
  return table;
}

std::vector<double> empirical_cooccurrence(const std::vector<Instance>& docs, const Corpus& corpus) {
  const auto n = corpus.label_space.size();
  std::vector<double> table(n * n, 0.0);
  for (const auto& inst : docs) {
    const auto idx = corpus.label_indices(inst);
    for (int i : idx)
      for (int j : idx) table[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] += 1.0;
  }
  if (!docs.empty())
    for (double& v : table) v /= static_cast<double>(docs.size());
  return table;
}

SyntheticCorpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  const auto n = static_cast<std::size_t>(spec.num_labels);
  const std::vector<double> pi = anchor_profile(spec);
  const std::vector<double> aff = spec.affinity.empty() ? planted_affinity(spec.num_labels) : spec.affinity;

  SyntheticCorpus out;
  for (std::size_t i = 0; i < n; ++i) out.corpus.label_space.push_back(label_name(static_cast<int>(i)));
  out.cooccurrence = generative_cooccurrence(spec);

  if (spec.target_cardinality > 1.0) {
    for (std::size_t i = 0; i < n; ++i) {
      bool isolated = true;
      for (std::size_t j = 0; j < n && isolated; ++j)
        if (j != i && (aff[i * n + j] > 0.0 || aff[j * n + i] > 0.0)) isolated = false;
      if (isolated) {
        out.warnings.push_back("label " + label_name(static_cast<int>(i)) +
                               " has no affinity to any other label; it always appears alone");
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> anchor_dist(pi.begin(), pi.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_kw(0, spec.keywords_per_label - 1);
  std::uniform_int_distribution<int> pick_noise(0, spec.noise_vocab - 1);

  auto make_doc = [&]() {
    const std::size_t anchor = anchor_dist(rng);
    std::vector<int> labels{static_cast<int>(anchor)};
    for (std::size_t b = 0; b < n; ++b) {
      if (b == anchor) continue;
      if (unit(rng) < aff[anchor * n + b]) labels.push_back(static_cast<int>(b));
    }
    std::sort(labels.begin(), labels.end());
    Instance inst;
    for (int l : labels) {
      inst.labels.push_back(label_name(l));
      for (int t = 0; t < spec.keyword_tokens_per_label; ++t) {
        if (unit(rng) < spec.noise_rate) inst.text.push_back(noise_word(pick_noise(rng)));
        else inst.text.push_back(keyword(l, pick_kw(rng)));
      }
    }
    for (int t = 0; t < spec.noise_tokens_per_doc; ++t) inst.text.push_back(noise_word(pick_noise(rng)));
    std::shuffle(inst.text.begin(), inst.text.end(), rng);
    return inst;
  };

  for (int i = 0; i < spec.train_docs; ++i) out.corpus.train.push_back(make_doc());
  for (int i = 0; i < spec.valid_docs; ++i) out.corpus.valid.push_back(make_doc());
  for (int i = 0; i < spec.test_docs; ++i) out.corpus.test.push_back(make_doc());
  return out;
}

void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& labels,
                  const std::vector<double>& matrix) {
  const std::size_t n = labels.size();
  if (matrix.size() != n * n) throw DimensionError("matrix does not match label count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write matrix file " + path.string());
  out << "label";
  for (const auto& l : labels) out << '\t' << l;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < n; ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < n; ++j) out << '\t' << matrix[i * n + j];
    out << '\n';
  }
}

}  // namespace laco
