#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gradcheck.hpp"
#include "laco/aux_tasks.hpp"
#include "laco/errors.hpp"
#include "laco/ops.hpp"

using namespace laco;
using laco::testing::gradcheck;
using laco::testing::random_tensor;

namespace {

bool contains(std::span<const int> s, int x) { return std::find(s.begin(), s.end(), x) != s.end(); }

// Re-derives a pair's target from the instance alone.
int derived_target(const PlcpSample& p, std::span<const int> rel) {
  return contains(rel, p.first) && contains(rel, p.second) ? 1 : 0;
}

}  // namespace

TEST_CASE("pair sampling enumerates the allowed pairs") {
  const std::vector<int> rel{0, 1}, irr{2};
  std::mt19937_64 rng(1);
  std::set<std::pair<int, int>> pos, neg;
  for (const auto& s : sample_plcp(rel, irr, 1.0, 2000, rng)) {
    CHECK(s.first != s.second);
    auto key = std::minmax(s.first, s.second);
    (s.target == 1 ? pos : neg).insert({key.first, key.second});
  }
  CHECK(pos == std::set<std::pair<int, int>>{{0, 1}});
  CHECK(neg == std::set<std::pair<int, int>>{{0, 2}, {1, 2}});
}

TEST_CASE("pair sampling ratio and edge cases") {
  std::mt19937_64 rng(2);
  const std::vector<int> rel{1, 4, 7}, irr{0, 2, 3, 5, 6};
  const auto draws = sample_plcp(rel, irr, 0.5, 30000, rng);
  const double frac =
      static_cast<double>(std::count_if(draws.begin(), draws.end(), [](const auto& s) { return s.target == 1; })) /
      30000.0;
  CHECK(std::abs(frac - 1.0 / 3.0) < 0.01);
  for (const auto& s : draws) {
    CHECK(s.target == derived_target(s, rel));
    CHECK(contains(rel, s.first));
    if (s.target == 0) CHECK(contains(irr, s.second));
  }

  const std::vector<int> single{3};
  for (const auto& s : sample_plcp(single, irr, 0.5, 500, rng)) CHECK(s.target == 0);
  const std::vector<int> all{0, 1, 2}, none;
  for (const auto& s : sample_plcp(all, none, 0.5, 500, rng)) CHECK(s.target == 1);
}

TEST_CASE("set sampling") {
  std::mt19937_64 rng(3);
  const std::vector<int> rel{0, 1, 2};
  const auto forced = sample_clcp(rel, 5, rng, 1);
  REQUIRE(forced);
  CHECK(forced->given.size() == 1);
  CHECK(forced->scored.size() == 4);

  const std::vector<int> two{1, 3};
  const auto pair = sample_clcp(two, 6, rng, 1);
  REQUIRE(pair);
  CHECK(std::count(pair->targets.begin(), pair->targets.end(), 1.0) == 1);

  const std::vector<int> one{2};
  CHECK_FALSE(sample_clcp(one, 6, rng).has_value());

  int size_one = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto s = sample_clcp(rel, 8, rng);
    REQUIRE(s);
    const auto sz = s->given.size();
    CHECK((sz == 1 || sz == 2));
    size_one += sz == 1 ? 1 : 0;
    // No leakage: given labels are never scored, positives are exactly the relevant, non-given labels.
    std::set<int> scored(s->scored.begin(), s->scored.end());
    for (int g : s->given) {
      CHECK(contains(rel, g));
      CHECK(scored.count(g) == 0);
      CHECK(s->position[static_cast<std::size_t>(g)] == 0);
    }
    CHECK(scored.size() + s->given.size() == 8);
    for (std::size_t t = 0; t < s->scored.size(); ++t) {
      const int l = s->scored[t];
      const bool positive = contains(rel, l) && !contains(s->given, l);
      CHECK(s->targets[t] == (positive ? 1.0 : 0.0));
    }
  }
  CHECK(std::abs(size_one / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("set sampling example") {
  // Relevant {a, b, c} with {a} given: b and c are positive, the rest negative.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_clcp(std::vector<int>{0, 1, 2}, 5, rng, 1);
    if (s->given != std::vector<int>{0}) continue;
    CHECK(s->scored == std::vector<int>{1, 2, 3, 4});
    CHECK(s->targets == std::vector<double>{1, 1, 0, 0});
    return;
  }
  FAIL("given set {a} never drawn");
}

TEST_CASE("pair loss values") {
  Tape tape;
  Var reps = tape.constant(Tensor({3, 2}));
  Var w = tape.constant(Tensor({4, 1}));
  CHECK(plcp_loss(reps, {0, 1, 1}, w, tape.constant(Tensor({1, 1}))).value().item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  Var b = tape.constant(Tensor({1, 1}, {std::log(4.0)}));  // sigmoid = 0.8
  CHECK(plcp_probability(reps, {0, 1, 1}, w, b).value().item() == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(plcp_loss(reps, {0, 1, 1}, w, b).value().item() == doctest::Approx(0.2231).epsilon(1e-4));

  std::mt19937_64 rng(5);
  Var r = tape.constant(random_tensor({4, 3}, rng));
  Var wr = tape.constant(random_tensor({6, 1}, rng));
  Var br = tape.constant(random_tensor({1, 1}, rng));
  const double ij = plcp_loss(r, {0, 2, 1}, wr, br, true).value().item();
  const double ji = plcp_loss(r, {2, 0, 1}, wr, br, true).value().item();
  CHECK(ij == doctest::Approx(ji).epsilon(1e-14));
  CHECK(plcp_loss(r, {0, 2, 1}, wr, br).value().item() != doctest::Approx(plcp_loss(r, {2, 0, 1}, wr, br).value().item()));

  const std::vector<PlcpSample> samples{{0, 1, 1}, {1, 3, 0}};
  const double mean = plcp_instance_loss(r, samples, wr, br, false).value().item();
  CHECK(mean == doctest::Approx((plcp_loss(r, samples[0], wr, br).value().item() +
                                 plcp_loss(r, samples[1], wr, br).value().item()) /
                                2.0)
                     .epsilon(1e-14));
}

TEST_CASE("set loss values") {
  std::mt19937_64 rng(6);
  Tape tape;
  const std::vector<int> rel{0, 5};
  const auto s = sample_clcp(rel, 54, rng, 1);
  Var zeros = tape.constant(Tensor({54, 8}));
  CHECK(clcp_loss(tape.constant(random_tensor({54, 8}, rng)), *s, zeros.tape().constant(Tensor({16, 1})),
                  tape.constant(Tensor({1, 1})))
            .value()
            .item() == doctest::Approx(53.0 * std::log(2.0)).epsilon(1e-12));

  // k = 1: the logit of position i is h_i, so rows ln 9 and -ln 9 give 0.9 and 0.1.
  ClcpSample manual;
  manual.given = {0};
  manual.position = {0, 1, 1};
  manual.scored = {1, 2};
  manual.targets = {1, 0};
  Var reps = tape.constant(Tensor({3, 1}, {0.3, std::log(9.0), -std::log(9.0)}));
  Var w = tape.constant(Tensor({2, 1}, {0, 1}));
  Var b = tape.constant(Tensor({1, 1}));
  const Tensor probs = clcp_probabilities(reps, manual, w, b).value();
  CHECK(probs[0] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(probs[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(clcp_loss(reps, manual, w, b).value().item() == doctest::Approx(0.2107).epsilon(1e-4));

  // Given-set order does not matter: the given rows are averaged.
  ClcpSample big;
  big.given = {0, 2, 3};
  big.position = {0, 1, 0, 0, 1};
  big.scored = {1, 4};
  big.targets = {1, 0};
  ClcpSample shuffled = big;
  shuffled.given = {3, 0, 2};
  Var rr = tape.constant(random_tensor({5, 3}, rng));
  Var ww = tape.constant(random_tensor({6, 1}, rng));
  CHECK(clcp_loss(rr, big, ww, b).value().item() ==
        doctest::Approx(clcp_loss(rr, shuffled, ww, b).value().item()).epsilon(1e-14));
}

TEST_CASE("auxiliary loss gradients") {
  std::mt19937_64 rng(7);
  const PlcpSample pair{1, 3, 1};
  auto f = [&](Tape&, const std::vector<Var>& in) { return plcp_loss(in[0], pair, in[1], in[2], false); };
  auto fs = [&](Tape&, const std::vector<Var>& in) { return plcp_loss(in[0], pair, in[1], in[2], true); };
  const Tensor r = random_tensor({4, 3}, rng), w = random_tensor({6, 1}, rng), b = random_tensor({1, 1}, rng);
  CHECK(gradcheck(f, {r, w, b}) < 1e-4);
  CHECK(gradcheck(fs, {r, w, b}) < 1e-4);
  const auto s = sample_clcp(std::vector<int>{0, 1, 3}, 5, rng, 2);
  auto g = [&](Tape&, const std::vector<Var>& in) { return clcp_loss(in[0], *s, in[1], in[2]); };
  CHECK(gradcheck(g, {random_tensor({5, 3}, rng), w, b}) < 1e-4);
}

TEST_CASE("combined objective") {
  CHECK(combined_loss(1.0, 0.5, 0.2, 0.4, TaskMode::both) == doctest::Approx(1.32).epsilon(1e-14));
  CHECK(combined_loss(1.0, 0.5, 0.2, 0.4, TaskMode::mlc) == 1.0);
  CHECK(combined_loss(1.0, 0.5, 0.2, 0.4, TaskMode::plcp) == 1.5);
  CHECK(combined_loss(1.0, 0.5, 0.2, 0.4, TaskMode::clcp) == 1.2);
  CHECK_THROWS_AS(combined_loss(1.0, 0.5, 0.2, 0.0, TaskMode::both), ConfigError);
  CHECK_THROWS_AS(combined_loss(1.0, 0.5, 0.2, 1.0, TaskMode::both), ConfigError);
  double prev = combined_loss(1.0, 0.5, 0.2, 0.01, TaskMode::both);
  for (double a = 0.02; a < 1.0; a += 0.01) {
    const double cur = combined_loss(1.0, 0.5, 0.2, a, TaskMode::both);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(parse_task_mode("+both") == TaskMode::both);
  CHECK(to_string(parse_task_mode(to_string(TaskMode::clcp))) == to_string(TaskMode::clcp));
  CHECK_THROWS_AS(parse_task_mode("nope"), ConfigError);
}
