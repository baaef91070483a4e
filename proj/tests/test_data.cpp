#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "laco/data.hpp"
#include "laco/errors.hpp"
#include "laco/vocab.hpp"
#include "tempdir.hpp"

using namespace laco;
using laco::testing::read_file;
using laco::testing::TempDir;

TEST_CASE("parse and format records") {
  const Instance inst = parse_instance("b a a\tHello, World  again", 1);
  CHECK(inst.labels == std::vector<std::string>{"a", "b"});
  CHECK(inst.text == std::vector<std::string>{"Hello,", "World", "again"});
  CHECK(parse_instance(format_instance(inst), 1) == inst);
  CHECK(parse_instance("a\t", 1).text.empty());
}

TEST_CASE("malformed and empty-label records name their line") {
  TempDir dir;
  const auto bad = dir.write("bad.tsv", "a\tfine\nno label field here\n");
  try {
    load_corpus(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  const auto empty = dir.write("empty.tsv", "a\tfine\na\tfine\n  \tno labels\n");
  try {
    load_corpus(empty);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("label space inference and unknown-label errors") {
  TempDir dir;
  const auto f = dir.write("two.tsv", "a\tx y\na b\tz\n");
  const Corpus c = load_corpus(f);
  CHECK(c.num_labels() == 2);
  CHECK(c.label_space == std::vector<std::string>{"a", "b"});
  CHECK(c.label_targets(c.train[1]) == std::vector<double>{1, 1});

  const auto g = dir.write("unknown.tsv", "a q\tx\nr a\ty\n");
  try {
    load_corpus(g, {}, {}, std::vector<std::string>{"a", "b"});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("q") != std::string::npos);
    CHECK(what.find("r") != std::string::npos);
  }
}

TEST_CASE("corpus statistics") {
  Corpus one;
  one.label_space = {"a", "b", "c"};
  one.train = {parse_instance("a b c\tw1 w2", 1)};
  const CorpusStats s = corpus_stats(one);
  CHECK(s.mean_labels == 3.0);
  CHECK(s.mean_length == 2.0);

  Corpus c;
  c.label_space = {"a", "b", "c"};
  c.train = {parse_instance("a\tx", 1), parse_instance("a b\tx y", 2), parse_instance("c b\tx y z", 3)};
  c.test = {parse_instance("a b\tq", 4)};
  const CorpusStats t = corpus_stats(c);
  CHECK(t.documents == 4);
  CHECK(t.labels == 3);
  CHECK(t.label_frequency == std::vector<std::size_t>{3, 3, 1});
  std::size_t total = 0;
  for (const auto& d : c.train) total += d.labels.size();
  for (const auto& d : c.test) total += d.labels.size();
  CHECK(std::accumulate(t.label_frequency.begin(), t.label_frequency.end(), std::size_t{0}) == total);
  CHECK(t.distinct_label_sets == 3);
  CHECK(t.mean_length == doctest::Approx(7.0 / 4.0));
}

TEST_CASE("load, save and reload round-trips bit-identically") {
  TempDir dir;
  const auto f = dir.write("c.tsv", "b a\tSome text, here\nc\t\na\tmore  words\n");
  const Corpus c = load_corpus(f);
  corpus_stats(c);
  write_instances(dir / "out.tsv", c.train);
  const Corpus again = load_corpus(dir / "out.tsv");
  CHECK(again == c);
  write_instances(dir / "out2.tsv", again.train);
  CHECK(read_file(dir / "out.tsv") == read_file(dir / "out2.tsv"));
  write_label_space(dir / "labels.txt", c.label_space);
  CHECK(read_label_space(dir / "labels.txt") == c.label_space);
}

TEST_CASE("epoch batches") {
  const auto b = epoch_batches(100, 32, 7, 0);
  std::vector<std::size_t> sizes;
  for (const auto& x : b) sizes.push_back(x.size());
  CHECK(sizes == std::vector<std::size_t>{32, 32, 32, 4});
  std::set<std::size_t> seen;
  for (const auto& x : b) seen.insert(x.begin(), x.end());
  CHECK(seen.size() == 100);
  CHECK(epoch_batches(100, 32, 7, 0) == b);
  CHECK(epoch_batches(100, 32, 8, 0) != b);
  CHECK(epoch_batches(100, 32, 7, 1) != b);
  CHECK(epoch_batches(5, 2, 1, 0, false) == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}, {4}});
  CHECK_THROWS_AS(epoch_batches(5, 0, 1, 0), ConfigError);
}

TEST_CASE("vocabulary") {
  const std::vector<Instance> docs{parse_instance("x\ta a b", 1)};
  const Vocab v = Vocab::build(docs, {"x"}, 2);
  CHECK(v.num_words() == 1);
  CHECK(v.word_id("a") == Vocab::kNumSpecial);
  CHECK(v.word_id("b") == Vocab::kUnk);
  CHECK_THROWS_AS(Vocab::build(docs, {}, 1), ConfigError);
  CHECK_THROWS_AS(Vocab::build({}, {"x"}, 1), ConfigError);

  std::vector<std::string> labels;
  for (int i = 0; i < 54; ++i) labels.push_back("cs." + std::to_string(i));
  const Vocab big = Vocab::build({parse_instance("cs.0\tThe cat, the DOG.", 1)}, labels, 1);
  CHECK(big.num_labels() == 54);
  int label_ids = 0;
  for (int id = 0; id < big.size(); ++id) label_ids += big.is_label_id(id) ? 1 : 0;
  CHECK(label_ids == 54);
  CHECK(big.first_label_id() + 54 == big.size());  // contiguous block at the end
  CHECK(big.word_id("the") != Vocab::kUnk);
  CHECK(big.word_id("dog") != Vocab::kUnk);
  CHECK(big.label_names() == labels);

  TempDir dir;
  big.save(dir / "vocab.txt");
  const Vocab back = Vocab::load(dir / "vocab.txt");
  CHECK(back == big);
  for (int id = 0; id < big.size(); ++id) CHECK(back.token(id) == big.token(id));
  CHECK(back.word_id("the") == big.word_id("the"));
}

TEST_CASE("tokenizer lowercases and strips punctuation") {
  CHECK(tokenize("Hello, World! e.g. --- x") == std::vector<std::string>{"hello", "world", "eg", "x"});
}

TEST_CASE("synthetic generator: deterministic edge") {
  SynthSpec spec;
  spec.num_labels = 3;
  spec.anchor_weights = {1, 0, 0};
  spec.affinity = {0, 1, 0, 0, 0, 0, 0, 0, 0};
  spec.train_docs = 50;
  spec.valid_docs = spec.test_docs = 0;
  const auto s = generate_synthetic(spec, 1);
  for (const auto& d : s.corpus.train) CHECK(d.labels == std::vector<std::string>{"l00", "l01"});
}

TEST_CASE("synthetic generator: long tail, determinism and truth table") {
  SynthSpec spec;
  spec.train_docs = 5000;
  spec.valid_docs = 0;
  spec.test_docs = 0;
  const auto s = generate_synthetic(spec, 3);
  const auto stats = split_stats(s.corpus.train, s.corpus.label_space);
  const auto least = *std::min_element(stats.label_frequency.begin(), stats.label_frequency.end());
  CHECK(static_cast<double>(least) / 5000.0 < 0.02);
  // Expected marginals (the diagonal of the truth table) agree with counts.
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(std::abs(static_cast<double>(stats.label_frequency[i]) / 5000.0 - s.cooccurrence[i * 20 + i]) < 0.02);
  }

  TempDir dir;
  const auto again = generate_synthetic(spec, 3);
  write_instances(dir / "a.tsv", s.corpus.train);
  write_instances(dir / "b.tsv", again.corpus.train);
  CHECK(read_file(dir / "a.tsv") == read_file(dir / "b.tsv"));
  CHECK(generate_synthetic(spec, 4).corpus.train != s.corpus.train);

  write_matrix(dir / "m.tsv", s.corpus.label_space, s.cooccurrence);
  const std::string m = read_file(dir / "m.tsv");
  CHECK(m.rfind("label\tl00\tl01", 0) == 0);
}

TEST_CASE("synthetic co-occurrence converges to the generative table") {
  SynthSpec spec;
  spec.train_docs = 10000;
  spec.valid_docs = spec.test_docs = 0;
  const auto s = generate_synthetic(spec, 5);
  const auto emp = empirical_cooccurrence(s.corpus.train, s.corpus);
  double worst = 0.0;
  for (std::size_t i = 0; i < emp.size(); ++i) worst = std::max(worst, std::abs(emp[i] - s.cooccurrence[i]));
  CHECK(worst < 0.02);
}

TEST_CASE("synthetic generator warns about isolated labels") {
  SynthSpec spec;
  spec.num_labels = 4;
  spec.affinity.assign(16, 0.0);
  spec.affinity[0 * 4 + 1] = 0.5;
  spec.target_cardinality = 1.5;
  spec.train_docs = 10;
  const auto s = generate_synthetic(spec, 1);
  CHECK(s.warnings.size() == 2);  // l02 and l03
  spec.target_cardinality = 0.0;
  CHECK(generate_synthetic(spec, 1).warnings.empty());
  spec.affinity[1] = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), ConfigError);
}
