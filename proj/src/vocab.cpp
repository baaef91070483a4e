#include "laco/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "laco/data.hpp"
#include "laco/errors.hpp"

namespace laco {

namespace {
const char* const kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
}

std::string normalize_token(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string tok = normalize_token(text.substr(i, j - i));
      if (!tok.empty()) out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

Vocab::Vocab(std::vector<std::string> words, std::vector<std::string> labels) {
  if (labels.empty()) throw ConfigError("vocabulary needs a non-empty label space");
  tokens_.assign(std::begin(kSpecials), std::end(kSpecials));
  num_words_ = static_cast<int>(words.size());
  num_labels_ = static_cast<int>(labels.size());
  for (auto& w : words) {
    word_ids_.emplace(w, static_cast<int>(tokens_.size()));
    tokens_.push_back(std::move(w));
  }
  for (const auto& l : labels) tokens_.push_back(label_token(l));
}

Vocab Vocab::build(const std::vector<Instance>& corpus, const std::vector<std::string>& label_space, int min_freq) {
  if (corpus.empty()) throw ConfigError("cannot build a vocabulary from an empty corpus");
  if (label_space.empty()) throw ConfigError("cannot build a vocabulary with an empty label space");
  std::map<std::string, long> freq;
  for (const auto& inst : corpus)
    for (const auto& raw : inst.text) {
      std::string tok = normalize_token(raw);
      if (!tok.empty()) ++freq[tok];
    }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, count] : freq)
    if (count >= min_freq) kept.emplace_back(tok, count);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [tok, count] : kept) words.push_back(tok);
  return Vocab(std::move(words), label_space);
}

int Vocab::word_id(std::string_view normalized) const {
  auto it = word_ids_.find(std::string(normalized));
  return it == word_ids_.end() ? kUnk : it->second;
}

std::vector<std::string> Vocab::label_names() const {
  std::vector<std::string> out;
  for (int i = 0; i < num_labels_; ++i) {
    const std::string& t = tokens_[static_cast<std::size_t>(label_id(i))];
    out.push_back(t.substr(7, t.size() - 8));
  }
  return out;
}

std::string Vocab::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() < kNumSpecial) throw DataError("vocabulary has fewer lines than special tokens");
  for (int i = 0; i < kNumSpecial; ++i)
    if (lines[static_cast<std::size_t>(i)] != kSpecials[i]) {
      throw DataError("vocabulary line " + std::to_string(i + 1) + " should be " + kSpecials[i]);
    }
  std::vector<std::string> words, labels;
  for (std::size_t i = kNumSpecial; i < lines.size(); ++i) {
    const std::string& t = lines[i];
    const bool is_label = t.rfind("[LABEL:", 0) == 0 && t.back() == ']';
    if (is_label) {
      labels.push_back(t.substr(7, t.size() - 8));
    } else {
      if (!labels.empty()) throw DataError("vocabulary word after label block at line " + std::to_string(i + 1));
      words.push_back(t);
    }
  }
  return Vocab(std::move(words), std::move(labels));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary to " + path.string());
  out << serialize();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocabulary " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace laco
