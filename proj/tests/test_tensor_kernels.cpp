#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bits.hpp"
#include "laco/errors.hpp"
#include "laco/kernels.hpp"
#include "laco/tensor.hpp"

using namespace laco;
using laco::testing::same_bits;

namespace {

// Textbook triple loop, p innermost.
std::vector<double> naive(kernels::GemmDims d, const std::vector<double>& a, const std::vector<double>& b, bool ta,
                          bool tb) {
  std::vector<double> c(d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i)
    for (std::size_t j = 0; j < d.n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < d.k; ++p) {
        const double av = ta ? a[p * d.m + i] : a[i * d.k + p];
        const double bv = tb ? b[j * d.k + p] : b[p * d.n + j];
        s += av * bv;
      }
      c[i * d.n + j] = s;
    }
  return c;
}

std::vector<double> draw(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("tensor construction checks the element count") {
  CHECK_THROWS_AS(Tensor(Shape{2, 3}, std::vector<double>(5)), DimensionError);
  Tensor t(Shape{2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.at(1, 2) == 1.5);
  const Tensor v = Tensor::vector({1, 2, 3});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 3);
  CHECK(Tensor::scalar(4).item() == 4);
  CHECK_THROWS_AS(t.item(), DimensionError);
  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
}

TEST_CASE("gemm kernels agree with a naive oracle") {
  std::mt19937_64 rng(3);
  for (auto [m, k, n] : std::vector<std::array<std::size_t, 3>>{{1, 1, 1}, {3, 4, 2}, {5, 7, 9}, {17, 13, 33}, {4, 8, 16}}) {
    const kernels::GemmDims d{m, k, n};
    const auto a = draw(m * k, rng), b = draw(k * n, rng), at = draw(k * m, rng), bt = draw(n * k, rng);
    std::vector<double> c(m * n);
    auto close = [](const std::vector<double>& x, const std::vector<double>& y) {
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > 1e-12 * (1.0 + std::abs(y[i]))) return false;
      return true;
    };
    kernels::serial::gemm_nn(d, a, b, c, false);
    CHECK(close(c, naive(d, a, b, false, false)));
    kernels::serial::gemm_tn(d, at, b, c, false);
    CHECK(close(c, naive(d, at, b, true, false)));
    kernels::serial::gemm_nt(d, a, bt, c, false);
    CHECK(close(c, naive(d, a, bt, false, true)));
    // accumulate adds onto the existing contents
    std::vector<double> acc(m * n, 1.0);
    kernels::serial::gemm_nn(d, a, b, acc, true);
    auto ref = naive(d, a, b, false, false);
    for (auto& x : ref) x += 1.0;
    CHECK(close(acc, ref));
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
#endif
  std::mt19937_64 rng(5);
  for (auto [m, k, n] : std::vector<std::array<std::size_t, 3>>{{1, 5, 3}, {9, 31, 17}, {64, 64, 64}, {130, 70, 45}}) {
    const kernels::GemmDims d{m, k, n};
    const auto a = draw(m * k, rng), b = draw(k * n, rng), at = draw(k * m, rng), bt = draw(n * k, rng);
    for (bool accumulate : {false, true}) {
      const auto init = draw(m * n, rng);
      auto s = init, p = init;
      kernels::serial::gemm_nn(d, a, b, s, accumulate);
      kernels::parallel::gemm_nn(d, a, b, p, accumulate);
      CHECK(same_bits(s, p));
      s = p = init;
      kernels::serial::gemm_tn(d, at, b, s, accumulate);
      kernels::parallel::gemm_tn(d, at, b, p, accumulate);
      CHECK(same_bits(s, p));
      s = p = init;
      kernels::serial::gemm_nt(d, a, bt, s, accumulate);
      kernels::parallel::gemm_nt(d, a, bt, p, accumulate);
      CHECK(same_bits(s, p));
    }
    const auto x = draw(m * k, rng);
    auto ys = draw(m * k, rng);
    auto yp = ys;
    kernels::serial::axpy(0.37, x, ys);
    kernels::parallel::axpy(0.37, x, yp);
    CHECK(same_bits(ys, yp));
    std::vector<double> ts(m * k), tp(m * k);
    kernels::serial::transpose(m, k, x, ts);
    kernels::parallel::transpose(m, k, x, tp);
    CHECK(same_bits(ts, tp));
    CHECK(ts[1 % k * m] == x[1 % k]);
  }
#ifdef _OPENMP
  omp_set_num_threads(saved);
#endif
}
