#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace laco {

/// One document with its relevant label set.
struct Instance {
  std::vector<std::string> text;    // whitespace tokens as stored on disk
  std::vector<std::string> labels;  // sorted, unique, non-empty

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Label space Y (lexicographic, fixed at load) and the three splits.
struct Corpus {
  std::vector<std::string> label_space;
  std::vector<Instance> train;
  std::vector<Instance> valid;
  std::vector<Instance> test;

  int num_labels() const { return static_cast<int>(label_space.size()); }
  // Index of a label name in the label space, or -1.
  int label_index(const std::string& name) const;
  // Label-space indices of an instance's labels (ascending).
  std::vector<int> label_indices(const Instance& inst) const;
  // n-length 0/1 indicator vector.
  std::vector<double> label_targets(const Instance& inst) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Parses one "labels<TAB>text" record. Throws DataError naming `line_no`.
Instance parse_instance(const std::string& line, std::size_t line_no);
std::string format_instance(const Instance& inst);

std::vector<Instance> read_instances(const std::filesystem::path& path);
void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances);

// Reads the given split files. Without an explicit label space the space is
// the sorted union of all labels seen; with one, unknown labels are an error
// that lists every offender.
Corpus load_corpus(const std::filesystem::path& train, const std::optional<std::filesystem::path>& valid = {},
                   const std::optional<std::filesystem::path>& test = {},
                   const std::optional<std::vector<std::string>>& label_space = {});
// Validates every instance against the label space (unknown or empty labels).
void validate_corpus(const Corpus& corpus);
void write_label_space(const std::filesystem::path& path, const std::vector<std::string>& labels);
std::vector<std::string> read_label_space(const std::filesystem::path& path);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t labels = 0;
  double mean_length = 0.0;
  double mean_labels = 0.0;
  std::vector<std::size_t> label_frequency;  // label-space order
  std::size_t distinct_label_sets = 0;
};

CorpusStats corpus_stats(const Corpus& corpus);
CorpusStats split_stats(const std::vector<Instance>& split, const std::vector<std::string>& label_space);
std::string format_stats(const CorpusStats& stats, const std::vector<std::string>& label_space);

// Index batches of one epoch. The order is a deterministic function of
// (seed, epoch); the final partial batch is kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch, bool shuffle = true);

/// Synthetic corpus generator description. Label i has name "lNN"; labels
/// are ranked by anchor weight, label 0 being the most frequent anchor.
struct SynthSpec {
  int num_labels = 20;
  double power_law_exponent = 1.5;
  // Overrides the power-law anchor profile when non-empty (need not be normalized).
  std::vector<double> anchor_weights;
  // Row-major n x n; affinity[a * n + b] = P(b joins | anchor a). Empty means
  // the default planted structure (see planted_affinity).
  std::vector<double> affinity;
  int keywords_per_label = 8;
  int keyword_tokens_per_label = 3;
  double noise_rate = 0.2;  // probability a keyword draw becomes a noise word
  int noise_vocab = 200;
  int noise_tokens_per_doc = 6;
  double target_cardinality = 0.0;  // 0 = unspecified
  int train_docs = 1000;
  int valid_docs = 100;
  int test_docs = 200;
};

// Clusters of four consecutive ranks with affinity 0.5 inside a cluster.
std::vector<double> planted_affinity(int num_labels);
std::vector<double> anchor_profile(const SynthSpec& spec);

struct SyntheticCorpus {
  Corpus corpus;
  // n x n row-major; entry (i, j) = P(i and j both relevant), diagonal = P(i relevant).
  std::vector<double> cooccurrence;
  std::vector<std::string> warnings;
};

SyntheticCorpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed);
// Exact generative co-occurrence table of a spec.
std::vector<double> generative_cooccurrence(const SynthSpec& spec);
// Empirical counterpart over a list of instances.
std::vector<double> empirical_cooccurrence(const std::vector<Instance>& docs, const Corpus& corpus);

// Header row of label names, then one row per label.
void write_matrix(const std::filesystem::path& path, const std::vector<std::string>& labels,
                  const std::vector<double>& matrix);

}  // namespace laco
