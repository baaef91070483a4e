#include "laco/data.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "laco/errors.hpp"

namespace laco {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

int Corpus::label_index(const std::string& name) const {
  auto it = std::lower_bound(label_space.begin(), label_space.end(), name);
  if (it == label_space.end() || *it != name) return -1;
  return static_cast<int>(it - label_space.begin());
}

std::vector<int> Corpus::label_indices(const Instance& inst) const {
  std::vector<int> out;
  out.reserve(inst.labels.size());
  for (const auto& l : inst.labels) {
    const int idx = label_index(l);
    if (idx < 0) throw DataError("label '" + l + "' is not in the label space");
    out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> Corpus::label_targets(const Instance& inst) const {
  std::vector<double> q(label_space.size(), 0.0);
  for (int idx : label_indices(inst)) q[static_cast<std::size_t>(idx)] = 1.0;
  return q;
}

Instance parse_instance(const std::string& raw, std::size_t line_no) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto tab = line.find('\t');
  if (tab == std::string::npos) {
    throw DataError("line " + std::to_string(line_no) + ": malformed record, missing label field (no tab)");
  }
  Instance inst;
  inst.labels = split_ws(line.substr(0, tab));
  if (inst.labels.empty()) throw DataError("line " + std::to_string(line_no) + ": empty label set");
  std::sort(inst.labels.begin(), inst.labels.end());
  inst.labels.erase(std::unique(inst.labels.begin(), inst.labels.end()), inst.labels.end());
  inst.text = split_ws(line.substr(tab + 1));
  return inst;
}

std::string format_instance(const Instance& inst) {
  std::string out;
  for (std::size_t i = 0; i < inst.labels.size(); ++i) {
    if (i) out += ' ';
    out += inst.labels[i];
  }
  out += '\t';
  for (std::size_t i = 0; i < inst.text.size(); ++i) {
    if (i) out += ' ';
    out += inst.text[i];
  }
  return out;
}

std::vector<Instance> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  std::vector<Instance> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    out.push_back(parse_instance(line, line_no));
  }
  return out;
}

void write_instances(const std::filesystem::path& path, const std::vector<Instance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  for (const auto& inst : instances) out << format_instance(inst) << '\n';
}

void validate_corpus(const Corpus& corpus) {
  if (corpus.label_space.empty()) throw DataError("empty label space");
  if (!std::is_sorted(corpus.label_space.begin(), corpus.label_space.end()) ||
      std::adjacent_find(corpus.label_space.begin(), corpus.label_space.end()) != corpus.label_space.end()) {
    throw DataError("label space must be sorted and unique");
  }
  std::set<std::string> offenders;
  auto check = [&](const std::vector<Instance>& split, const char* name) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i].labels.empty()) {
        throw DataError(std::string(name) + " record " + std::to_string(i + 1) + ": empty label set");
      }
      for (const auto& l : split[i].labels)
        if (corpus.label_index(l) < 0) offenders.insert(l);
    }
  };
  check(corpus.train, "train");
  check(corpus.valid, "valid");
  check(corpus.test, "test");
  if (!offenders.empty()) {
    std::string msg = "labels outside the label space:";
    for (const auto& o : offenders) msg += " " + o;
    throw DataError(msg);
  }
}

Corpus load_corpus(const std::filesystem::path& train, const std::optional<std::filesystem::path>& valid,
                   const std::optional<std::filesystem::path>& test,
                   const std::optional<std::vector<std::string>>& label_space) {
  Corpus c;
  c.train = read_instances(train);
  if (valid) c.valid = read_instances(*valid);
  if (test) c.test = read_instances(*test);
  if (label_space) {
    c.label_space = *label_space;
    std::sort(c.label_space.begin(), c.label_space.end());
  } else {
    std::set<std::string> all;
    for (const auto* split : {&c.train, &c.valid, &c.test})
      for (const auto& inst : *split) all.insert(inst.labels.begin(), inst.labels.end());
    c.label_space.assign(all.begin(), all.end());
  }
  validate_corpus(c);
  return c;
}

void write_label_space(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write label file " + path.string());
  for (const auto& l : labels) out << l << '\n';
}

std::vector<std::string> read_label_space(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read label file " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(line);
  return out;
}

CorpusStats split_stats(const std::vector<Instance>& split, const std::vector<std::string>& label_space) {
  CorpusStats s;
  s.labels = label_space.size();
  s.label_frequency.assign(label_space.size(), 0);
  std::set<std::vector<std::string>> combos;
  double len = 0.0, card = 0.0;
  for (const auto& inst : split) {
    ++s.documents;
    len += static_cast<double>(inst.text.size());
    card += static_cast<double>(inst.labels.size());
    for (const auto& l : inst.labels) {
      auto it = std::lower_bound(label_space.begin(), label_space.end(), l);
      if (it == label_space.end() || *it != l) throw DataError("label '" + l + "' is not in the label space");
      ++s.label_frequency[static_cast<std::size_t>(it - label_space.begin())];
    }
    combos.insert(inst.labels);
  }
  if (s.documents) {
    s.mean_length = len / static_cast<double>(s.documents);
    s.mean_labels = card / static_cast<double>(s.documents);
  }
  s.distinct_label_sets = combos.size();
  return s;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  std::vector<Instance> all;
  all.reserve(corpus.train.size() + corpus.valid.size() + corpus.test.size());
  for (const auto* split : {&corpus.train, &corpus.valid, &corpus.test}) all.insert(all.end(), split->begin(), split->end());
  if (all.empty()) throw DataError("corpus_stats on an empty corpus");
  return split_stats(all, corpus.label_space);
}

std::string format_stats(const CorpusStats& s, const std::vector<std::string>& label_space) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "documents\t" << s.documents << '\n';
  os << "labels\t" << s.labels << '\n';
  os << "mean_length\t" << s.mean_length << '\n';
  os << "mean_labels\t" << s.mean_labels << '\n';
  os << "distinct_label_sets\t" << s.distinct_label_sets << '\n';
  os << "label_frequency\n";
  for (std::size_t i = 0; i < label_space.size(); ++i) os << "  " << label_space[i] << '\t' << s.label_frequency[i] << '\n';
  return os.str();
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch, bool shuffle) {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < count; i += batch_size) {
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(count, i + batch_size)));
  }
  return out;
}

}  // namespace laco
