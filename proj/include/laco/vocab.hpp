#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace laco {

struct Instance;

// Lowercases and strips punctuation from whitespace-separated tokens; tokens
// that become empty are dropped.
std::vector<std::string> tokenize(std::string_view text);
std::string normalize_token(std::string_view raw);

/// Token <-> id map. Layout: the four specials, then words (most frequent
/// first, ties alphabetical), then one atomic token per label in label-space
/// order. Label ids are therefore one contiguous block at the end.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kNumSpecial = 4;

  Vocab() = default;
  Vocab(std::vector<std::string> words, std::vector<std::string> labels);

  // Words with frequency >= min_freq over the corpus' normalized tokens.
  static Vocab build(const std::vector<Instance>& corpus, const std::vector<std::string>& label_space, int min_freq);

  int size() const { return static_cast<int>(tokens_.size()); }
  int num_words() const { return num_words_; }
  int num_labels() const { return num_labels_; }
  int first_label_id() const { return kNumSpecial + num_words_; }
  int label_id(int label_index) const { return first_label_id() + label_index; }
  bool is_label_id(int id) const { return id >= first_label_id() && id < size(); }

  // Normalized word -> id, or kUnk.
  int word_id(std::string_view normalized) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::vector<std::string> label_names() const;

  // Plain text, one token per line, line number = id.
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);
  std::string serialize() const;
  static Vocab deserialize(const std::string& text);

  static std::string label_token(std::string_view label) { return "[LABEL:" + std::string(label) + "]"; }

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> word_ids_;
  int num_words_ = 0;
  int num_labels_ = 0;
};

}  // namespace laco
