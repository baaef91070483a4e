#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "laco/errors.hpp"
#include "laco/metrics.hpp"
#include "metric_oracle.hpp"
#include "tempdir.hpp"

using namespace laco;
using laco::testing::oracle_scores;
using laco::testing::random_pred_file;
using laco::testing::TempDir;

namespace {

PredFile abc(std::vector<LabelSet> gold, std::vector<LabelSet> pred) {
  return {{"a", "b", "c"}, std::move(gold), std::move(pred)};
}

}  // namespace

TEST_CASE("hamming loss") {
  const PredFile one{{"a", "b", "c", "d"}, {{0, 2}}, {{0, 1}}};
  CHECK(hamming_loss(one) == 0.5);
  const PredFile same{{"a", "b", "c", "d"}, {{0, 2}}, {{0, 2}}};
  CHECK(hamming_loss(same) == 0.0);
}

TEST_CASE("micro and macro scores on the worked example") {
  const PredFile f = abc({{0, 1}, {1}}, {{0}, {1, 2}});
  const MicroMacro m = micro_macro(f);
  CHECK(m.micro_p == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.micro_r == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.micro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.macro_f1 == doctest::Approx((1.0 + 2.0 / 3.0 + 0.0) / 3.0).epsilon(1e-15));
  CHECK(m.macro_f1 == doctest::Approx(0.556).epsilon(1e-3));

  const MicroMacro perfect = micro_macro(abc({{0, 1}, {2}}, {{0, 1}, {2}}));
  for (double v : {perfect.micro_p, perfect.micro_r, perfect.micro_f1, perfect.macro_p, perfect.macro_r,
                   perfect.macro_f1})
    CHECK(v == 1.0);
}

TEST_CASE("subset accuracy and diversity") {
  const PredFile exact = abc({{0}, {0, 1}, {0}}, {{0}, {0, 1}, {0}});
  CHECK(subset_acc_and_diversity(exact).accuracy == 1.0);
  CHECK(subset_acc_and_diversity(exact).distinct_predicted == 2);
  CHECK(subset_acc_and_diversity(abc({{1}, {2}}, {{0}, {0}})).distinct_predicted == 1);
  CHECK(subset_acc_and_diversity(abc({{1}, {2}}, {{}, {}})).distinct_predicted == 1);
}

TEST_CASE("metrics agree with the counting oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const PredFile f = random_pred_file(200, 10, rng);
    const auto o = oracle_scores(f);
    const MicroMacro m = micro_macro(f);
    const SubsetStats s = subset_acc_and_diversity(f);
    CHECK(std::abs(hamming_loss(f) - o.hamming) < 1e-12);
    CHECK(std::abs(m.micro_p - o.micro_p) < 1e-12);
    CHECK(std::abs(m.micro_r - o.micro_r) < 1e-12);
    CHECK(std::abs(m.micro_f1 - o.micro_f1) < 1e-12);
    CHECK(std::abs(m.macro_p - o.macro_p) < 1e-12);
    CHECK(std::abs(m.macro_r - o.macro_r) < 1e-12);
    CHECK(std::abs(m.macro_f1 - o.macro_f1) < 1e-12);
    CHECK(std::abs(s.accuracy - o.accuracy) < 1e-12);
    CHECK(s.distinct_predicted == o.distinct);
    std::uint64_t tp = 0, fp = 0, fn = 0;
    for (const auto& t : label_tallies(f)) {
      tp += t.tp;
      fp += t.fp;
      fn += t.fn;
    }
    CHECK(tp == o.tp);
    CHECK(fp == o.fp);
    CHECK(fn == o.fn);
  }
}

TEST_CASE("metric invariants") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const PredFile f = random_pred_file(30, 6, rng, 0.3, trial % 4 == 0 ? 0.0 : 0.05);
    // Simultaneous relabeling of gold and predictions.
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PredFile g = f;
    for (auto* sets : {&g.gold, &g.pred})
      for (auto& s : *sets) {
        for (int& l : s) l = perm[static_cast<std::size_t>(l)];
        std::sort(s.begin(), s.end());
      }
    CHECK(hamming_loss(g) == doctest::Approx(hamming_loss(f)).epsilon(1e-15));
    CHECK(micro_macro(g).micro_f1 == doctest::Approx(micro_macro(f).micro_f1).epsilon(1e-15));

    const MicroMacro m = micro_macro(f);
    CHECK(m.micro_f1 >= 0.0);
    CHECK(m.micro_f1 <= 1.0);
    for (const auto& t : label_tallies(f)) {
      const auto [p, r, f1] = prf(t);
      CHECK(f1 >= std::min(p, r) - 1e-15);
      CHECK(f1 <= std::max(p, r) + 1e-15);
    }
    CHECK((subset_acc_and_diversity(f).accuracy == 1.0) == (hamming_loss(f) == 0.0));
  }
}

TEST_CASE("frequency groups") {
  const auto uniform = frequency_groups(std::vector<std::size_t>(12, 5));
  for (const auto& g : uniform) CHECK(g.size() == 3);
  CHECK(uniform[0] == std::vector<int>{0, 1, 2});

  // Ranked masses 40 20 10 8 6 5 4 3 2 1 1; the mass before each label
  // (0, 40, 60, 70, 78, ...) picks its quarter.
  const std::vector<std::size_t> freq{10, 40, 1, 20, 8, 6, 5, 4, 3, 2, 1};
  const auto groups = frequency_groups(freq);
  CHECK(groups[0] == std::vector<int>{1});
  CHECK(groups[1] == std::vector<int>{3});
  CHECK(groups[2] == std::vector<int>{0, 4});
  CHECK(groups[3] == std::vector<int>{5, 6, 7, 8, 9, 2, 10});

  const auto cut = frequency_groups(freq, std::array<std::size_t, 3>{2, 4, 4});
  CHECK(cut[0] == std::vector<int>{1, 3});
  CHECK(cut[2].empty());
  CHECK_THROWS_AS(frequency_groups(freq, std::array<std::size_t, 3>{4, 2, 5}), ConfigError);

  // Perfect only on group-1 labels.
  PredFile f{{"a", "b", "c", "d"}, {{0, 1}, {0, 2}, {0, 3}}, {{0}, {0}, {0}}};
  const auto g = group_macro_f1(frequency_groups({3, 1, 1, 1}, std::array<std::size_t, 3>{1, 2, 3}), f);
  CHECK(*g[0] == 1.0);
  CHECK(*g[1] == 0.0);
  const auto gaps = group_macro_f1(frequency_groups({3, 1, 1, 1}, std::array<std::size_t, 3>{1, 2, 2}), f);
  CHECK_FALSE(gaps[2].has_value());
}

TEST_CASE("conditional KL") {
  const std::vector<LabelSet> ref{{0, 1}, {0, 2}};
  const std::vector<LabelSet> model{{0, 1}, {0, 1}, {0, 1}, {0, 2}};
  const KlResult r = conditional_kl(ref, model, 3);
  CHECK(r.distance == doctest::Approx(0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25)).epsilon(1e-12));
  CHECK(std::abs(r.distance - 0.1438) < 1e-4);
  CHECK_FALSE(r.degenerate);
  CHECK(conditional_kl(ref, ref, 3).distance == 0.0);
  CHECK(conditional_kl(model, model, 3).distance == 0.0);

  // Pair (a, c) missing from the model: floored, finite.
  const KlResult floor = conditional_kl(ref, {{0, 1}}, 3, 1e-6);
  CHECK(std::isfinite(floor.distance));
  CHECK(floor.distance > 0.0);

  const KlResult none = conditional_kl({{0}, {1}}, model, 3);
  CHECK(none.degenerate);
  CHECK(none.distance == 0.0);
}

TEST_CASE("prediction file round trip and report") {
  std::mt19937_64 rng(13);
  const PredFile f = random_pred_file(50, 5, rng);
  TempDir dir;
  write_pred_file(dir / "p.tsv", f);
  const PredFile back = read_pred_file(dir / "p.tsv", f.label_space);
  CHECK(back == f);
  const std::vector<std::size_t> freq{9, 7, 5, 3, 1};
  CHECK(format_report_csv(evaluate_predictions(back, freq)) == format_report_csv(evaluate_predictions(f, freq)));

  const auto bad = dir.write("bad.tsv", "a b\ta\nb\tzz\n");
  try {
    read_pred_file(bad, std::vector<std::string>{"a", "b"});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.tsv:2") != std::string::npos);
  }
  const PredFile inferred = read_pred_file(bad);
  CHECK(inferred.label_space == std::vector<std::string>{"a", "b", "zz"});

  const std::string csv = format_report_csv(evaluate_predictions(f, freq));
  CHECK(csv.rfind("key,value\n", 0) == 0);
  CHECK(csv.find("micro_f1,") != std::string::npos);
  CHECK_FALSE(format_report_text(evaluate_predictions(f, freq)).empty());
}
