#include "laco/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace laco::kernels {

namespace {

// Operands are addressed through strides so one kernel serves A*B, A^T*B
// and A*B^T: A(i, p) = a[i * row + p * col], B(p, j) = b[p * row + j * col].
struct Strided {
  const double* data;
  std::size_t row;
  std::size_t col;
  double operator()(std::size_t r, std::size_t c) const { return data[r * row + c * col]; }
};

constexpr std::size_t kBlockRows = 4;
constexpr std::size_t kBlockCols = 8;

// Every output element is a single accumulator that starts at 0 (or the old
// C value) and adds A(i,p)*B(p,j) for p = 0, 1, ..., k-1. Packing and the
// 4 x 8 register tile never change that order, so any partition of the rows
// into whole tiles gives the same bits.
void block_rows(GemmDims d, Strided a, Strided b, double* c, std::size_t i0, std::size_t i1, bool accumulate) {
  const std::size_t tiles = (i1 - i0) / kBlockRows;
  const std::size_t tail = i0 + tiles * kBlockRows;
  const std::size_t panels = d.n / kBlockCols;
  const std::size_t edge = panels * kBlockCols;

  // A tiles p-major: apack[t][p][r].
  std::vector<double> apack(tiles * d.k * kBlockRows);
  for (std::size_t t = 0; t < tiles; ++t)
    for (std::size_t r = 0; r < kBlockRows; ++r)
      for (std::size_t p = 0; p < d.k; ++p) apack[(t * d.k + p) * kBlockRows + r] = a(i0 + t * kBlockRows + r, p);

  std::vector<double> bpack(d.k * kBlockCols);
  for (std::size_t panel = 0; panel < panels; ++panel) {
    const std::size_t j = panel * kBlockCols;
    for (std::size_t q = 0; q < kBlockCols; ++q)
      for (std::size_t p = 0; p < d.k; ++p) bpack[p * kBlockCols + q] = b(p, j + q);
    for (std::size_t t = 0; t < tiles; ++t) {
      const std::size_t i = i0 + t * kBlockRows;
      const double* ap = apack.data() + t * d.k * kBlockRows;
      const double* bp = bpack.data();
      double acc[kBlockRows][kBlockCols];
      for (std::size_t r = 0; r < kBlockRows; ++r)
        for (std::size_t q = 0; q < kBlockCols; ++q) acc[r][q] = accumulate ? c[(i + r) * d.n + j + q] : 0.0;
      for (std::size_t p = 0; p < d.k; ++p) {
        const double* av = ap + p * kBlockRows;
        const double* bv = bp + p * kBlockCols;
        for (std::size_t r = 0; r < kBlockRows; ++r)
          for (std::size_t q = 0; q < kBlockCols; ++q) acc[r][q] += av[r] * bv[q];
      }
      for (std::size_t r = 0; r < kBlockRows; ++r)
        for (std::size_t q = 0; q < kBlockCols; ++q) c[(i + r) * d.n + j + q] = acc[r][q];
    }
  }

  auto scalar = [&](std::size_t i, std::size_t j) {
    double acc = accumulate ? c[i * d.n + j] : 0.0;
    for (std::size_t p = 0; p < d.k; ++p) acc += a(i, p) * b(p, j);
    c[i * d.n + j] = acc;
  };
  for (std::size_t i = i0; i < tail; ++i)
    for (std::size_t j = edge; j < d.n; ++j) scalar(i, j);
  for (std::size_t i = tail; i < i1; ++i)
    for (std::size_t j = 0; j < d.n; ++j) scalar(i, j);
}

Strided a_nn(GemmDims d, const double* a) { return {a, d.k, 1}; }
Strided a_tn(GemmDims d, const double* a) { return {a, 1, d.m}; }
Strided b_nn(GemmDims d, const double* b) { return {b, d.n, 1}; }
Strided b_nt(GemmDims d, const double* b) { return {b, 1, d.k}; }

// Row range of thread t when rows are dealt out in whole blocks.
std::pair<std::size_t, std::size_t> thread_rows(std::size_t m, std::size_t nt, std::size_t t) {
  const std::size_t blocks = (m + kBlockRows - 1) / kBlockRows;
  const std::size_t per = (blocks + nt - 1) / nt;
  const std::size_t i0 = std::min(m, t * per * kBlockRows);
  const std::size_t i1 = std::min(m, i0 + per * kBlockRows);
  return {i0, i1};
}

template <typename F>
void for_thread_rows(std::size_t m, F&& body) {
#pragma omp parallel
  {
#ifdef _OPENMP
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto t = static_cast<std::size_t>(omp_get_thread_num());
#else
    const std::size_t nt = 1, t = 0;
#endif
    const auto [i0, i1] = thread_rows(m, nt, t);
    if (i0 < i1) body(i0, i1);
  }
}

}  // namespace

namespace serial {

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  block_rows(d, a_nn(d, a.data()), b_nn(d, b.data()), c.data(), 0, d.m, accumulate);
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  block_rows(d, a_tn(d, a.data()), b_nn(d, b.data()), c.data(), 0, d.m, accumulate);
}

void transpose(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out) {
  constexpr std::size_t tile = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += tile)
    for (std::size_t c0 = 0; c0 < cols; c0 += tile)
      for (std::size_t r = r0; r < std::min(rows, r0 + tile); ++r)
        for (std::size_t c = c0; c < std::min(cols, c0 + tile); ++c) out[c * rows + r] = in[r * cols + c];
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  block_rows(d, a_nn(d, a.data()), b_nt(d, b.data()), c.data(), 0, d.m, accumulate);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace serial

namespace parallel {

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  for_thread_rows(d.m, [&](std::size_t i0, std::size_t i1) {
    block_rows(d, a_nn(d, a.data()), b_nn(d, b.data()), c.data(), i0, i1, accumulate);
  });
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  for_thread_rows(d.m, [&](std::size_t i0, std::size_t i1) {
    block_rows(d, a_tn(d, a.data()), b_nn(d, b.data()), c.data(), i0, i1, accumulate);
  });
}

void transpose(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out) {
  const auto r = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < r; ++i)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(i) * cols + c];
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  for_thread_rows(d.m, [&](std::size_t i0, std::size_t i1) {
    block_rows(d, a_nn(d, a.data()), b_nt(d, b.data()), c.data(), i0, i1, accumulate);
  });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

}  // namespace parallel

bool parallel_available() {
#ifdef _OPENMP
  return omp_get_max_threads() > 1 && !omp_in_parallel();
#else
  return false;
#endif
}

namespace {
bool go_parallel(std::size_t work) { return work >= kParallelThreshold && parallel_available(); }
}  // namespace

void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  if (go_parallel(d.m * d.k * d.n)) return parallel::gemm_nn(d, a, b, c, accumulate);
  serial::gemm_nn(d, a, b, c, accumulate);
}

void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  if (go_parallel(d.m * d.k * d.n)) return parallel::gemm_tn(d, a, b, c, accumulate);
  serial::gemm_tn(d, a, b, c, accumulate);
}

void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate) {
  if (go_parallel(d.m * d.k * d.n)) return parallel::gemm_nt(d, a, b, c, accumulate);
  serial::gemm_nt(d, a, b, c, accumulate);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (go_parallel(x.size() * 16)) return parallel::axpy(alpha, x, y);
  serial::axpy(alpha, x, y);
}

}  // namespace laco::kernels
