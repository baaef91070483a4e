#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "laco/errors.hpp"
#include "laco/mltc_head.hpp"
#include "laco/ops.hpp"

using namespace laco;
using laco::testing::gradcheck;
using laco::testing::project;
using laco::testing::random_tensor;

TEST_CASE("compatibility is the matrix of dot products") {
  Tape tape;
  Var d = tape.constant(Tensor({2, 4}, {1, 0, 0, 0, 0, 1, 0, 0}));
  Var y = tape.constant(Tensor({2, 4}, {0, 0, 1, 0, 0, 0, 0, 1}));
  for (double v : compatibility(d, y).value().data()) CHECK(v == 0.0);

  const double s = 1.0 / std::sqrt(2.0);
  Var unit = tape.constant(Tensor({1, 2}, {s, s}));
  Var labels = tape.constant(Tensor({2, 2}, {1, 0, s, s}));
  CHECK(compatibility(unit, labels).value().at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 rng(1);
  const Tensor a = random_tensor({3, 4}, rng), b = random_tensor({2, 4}, rng);
  const Tensor m = compatibility(tape.constant(a), tape.constant(b)).value();
  REQUIRE(m.shape() == Shape{3, 2});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < 4; ++t) dot += a.at(i, t) * b.at(j, t);
      CHECK(m.at(i, j) == doctest::Approx(dot).epsilon(1e-15));
    }
  CHECK_THROWS_AS(compatibility(tape.constant(Tensor({3, 4})), tape.constant(Tensor({2, 5}))), DimensionError);
}

namespace {

struct HeadInputs {
  Tensor compat, doc, filters, bias;
};

HeadInputs random_head(std::size_t m, std::size_t n, std::size_t k, std::size_t window, std::size_t f,
                       std::mt19937_64& rng) {
  return {random_tensor({m, n}, rng), random_tensor({m, k}, rng), random_tensor({window * n, f}, rng),
          random_tensor({1, f}, rng)};
}

AttentionResult run(Tape& tape, const HeadInputs& h, std::size_t window, std::size_t pad_left) {
  return cross_attention(tape.constant(h.compat), tape.constant(h.doc), tape.constant(h.filters),
                         tape.constant(h.bias), window, pad_left);
}

}  // namespace

TEST_CASE("uniform compatibility gives uniform attention") {
  std::mt19937_64 rng(2);
  // All-zero M: every block, padded or not, is identical.
  HeadInputs h = random_head(5, 3, 4, 10, 6, rng);
  h.compat = Tensor({5, 3});
  Tape tape;
  AttentionResult r = run(tape, h, 10, 5);
  for (double b : r.weights.value().data()) CHECK(b == doctest::Approx(0.2).epsilon(1e-14));
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 5; ++i) mean += h.doc.at(i, j) / 5.0;
    CHECK(r.vector.value().at(0, j) == doctest::Approx(mean).epsilon(1e-14));
  }
  // A nonzero constant is uniform only without edge padding.
  h.compat = Tensor({5, 3}, 0.7);
  h.filters = random_tensor({3, 6}, rng);
  AttentionResult w1 = run(tape, h, 1, 0);
  for (double b : w1.weights.value().data()) CHECK(b == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("single-word and empty documents") {
  std::mt19937_64 rng(3);
  const HeadInputs h = random_head(1, 3, 4, 10, 6, rng);
  Tape tape;
  AttentionResult r = run(tape, h, 10, 5);
  CHECK_FALSE(r.degenerate);
  CHECK(r.weights.value().item() == 1.0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(r.vector.value().at(0, j) == doctest::Approx(h.doc.at(0, j)).epsilon(1e-15));

  HeadInputs e = random_head(0, 3, 4, 10, 6, rng);
  AttentionResult z = run(tape, e, 10, 5);
  CHECK(z.degenerate);
  CHECK(z.vector.shape() == Shape{1, 4});
  for (double v : z.vector.value().data()) CHECK(v == 0.0);
}

TEST_CASE("attention is a distribution and c lies in the hull of the words") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng() % 12;
    HeadInputs h = random_head(m, 4, 3, 10, 5, rng);
    for (auto& v : h.compat.data()) v *= 4.0;
    Tape tape;
    AttentionResult r = run(tape, h, 10, 5);
    const auto& beta = r.weights.value().data();
    double total = 0.0;
    for (double b : beta) {
      CHECK(b >= 0.0);
      total += b;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
    // With the weights known to be convex, c must be exactly their mixture,
    // hence bounded per coordinate by the extreme word values.
    for (std::size_t j = 0; j < 3; ++j) {
      double lo = 1e300, hi = -1e300, mix = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        lo = std::min(lo, h.doc.at(i, j));
        hi = std::max(hi, h.doc.at(i, j));
        mix += beta[i] * h.doc.at(i, j);
      }
      const double c = r.vector.value().at(0, j);
      CHECK(c == doctest::Approx(mix).epsilon(1e-12));
      CHECK(c >= lo - 1e-12);
      CHECK(c <= hi + 1e-12);
    }
  }
}

TEST_CASE("cross attention gradients match finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    // Inputs: 6 x 3 label-compatibility map, 6 x 8 word vectors.
    const HeadInputs h = random_head(6, 3, 8, 10, 4, rng);
    auto f = [](Tape&, const std::vector<Var>& in) {
      return project(cross_attention(in[0], in[1], in[2], in[3], 10, 5).vector);
    };
    CHECK(gradcheck(f, {h.compat, h.doc, h.filters, h.bias}) < 1e-4);
    // Through the compatibility map as well, as in the full model.
    const Tensor labels = random_tensor({3, 8}, rng);
    auto g = [](Tape&, const std::vector<Var>& in) {
      return project(cross_attention(compatibility(in[0], in[1]), in[0], in[2], in[3], 10, 5).vector);
    };
    CHECK(gradcheck(g, {h.doc, labels, h.filters, h.bias}) < 1e-4);
  }
}

TEST_CASE("prediction thresholds") {
  const Prediction half = predict(Tensor({4}), Tensor({3, 4}), Tensor({3}), 0.5);
  CHECK(half.probs == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(half.predicted == std::vector<int>{0, 1, 2});

  const Prediction one = predict(Tensor({4}), Tensor({3, 4}), Tensor({3}, {-10, 10, -10}), 0.5);
  CHECK(one.predicted == std::vector<int>{1});

  CHECK(threshold_prediction(std::vector<double>{0.1, 0.2}, 0.5).predicted.empty());
  CHECK_THROWS_AS(threshold_prediction(std::vector<double>{0.1}, 1.0), ConfigError);
  CHECK_THROWS_AS(threshold_prediction(std::vector<double>{0.1}, 0.0), ConfigError);

  std::mt19937_64 rng(6);
  const Tensor c = random_tensor({5}, rng), w = random_tensor({7, 5}, rng), b = random_tensor({7}, rng);
  const Prediction p = predict(c, w, b, 0.3);
  for (std::size_t i = 0; i < 7; ++i) {
    double z = b[i];
    for (std::size_t t = 0; t < 5; ++t) z += w.at(i, t) * c[t];
    const double expect = 1.0 / (1.0 + std::exp(-z));
    CHECK(p.probs[i] == doctest::Approx(expect).epsilon(1e-14));
    const bool in = std::find(p.predicted.begin(), p.predicted.end(), static_cast<int>(i)) != p.predicted.end();
    CHECK(in == (p.probs[i] >= 0.3));
  }
  CHECK_THROWS_AS(predict(Tensor({4}), Tensor({3, 5}), Tensor({3}), 0.5), DimensionError);
}

TEST_CASE("classification loss") {
  std::vector<double> half(54, 0.5), gold(54, 0.0);
  gold[3] = gold[10] = 1.0;
  CHECK(mlc_loss(half, gold) == doctest::Approx(54.0 * std::log(2.0)).epsilon(1e-12));

  std::vector<double> perfect(54);
  for (std::size_t i = 0; i < 54; ++i) perfect[i] = gold[i] == 1.0 ? 1.0 : 0.0;
  CHECK(mlc_loss(perfect, gold) < 1e-9);

  const double two = mlc_loss(std::vector<double>{0.9, 0.2}, std::vector<double>{1, 0});
  CHECK(two == doctest::Approx(-(std::log(0.9) + std::log(0.8))).epsilon(1e-12));
  CHECK(two == doctest::Approx(0.3285).epsilon(1e-4));

  std::mt19937_64 rng(7);
  std::vector<double> p(9), q(9);
  for (std::size_t i = 0; i < 9; ++i) {
    p[i] = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    q[i] = static_cast<double>(rng() % 2);
  }
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pp(9), qq(9);
  for (std::size_t i = 0; i < 9; ++i) {
    pp[i] = p[perm[i]];
    qq[i] = q[perm[i]];
  }
  CHECK(mlc_loss(pp, qq) == doctest::Approx(mlc_loss(p, q)).epsilon(1e-14));
}

TEST_CASE("head parameter layout") {
  std::mt19937_64 rng(8);
  ParameterStore with, without;
  CAConfig c;
  c.num_labels = 6;
  c.hidden = 16;
  c.filters = 5;
  const CAParams a = add_ca_params(with, c, rng);
  CHECK(with[a.filters].value.shape() == Shape{60, 5});
  CHECK(with[a.classifier_weight].value.shape() == Shape{6, 16});
  CHECK(with[a.classifier_bias].value.shape() == Shape{1, 6});
  CHECK(a.pad_left == 5);
  c.attention = false;
  const CAParams b = add_ca_params(without, c, rng);
  CHECK_FALSE(b.has_attention);
  CHECK(without.size() == 2);
  c.zero_init_classifier = true;
  ParameterStore zero;
  const CAParams z = add_ca_params(zero, c, rng);
  for (double v : zero[z.classifier_weight].value.data()) CHECK(v == 0.0);
}
