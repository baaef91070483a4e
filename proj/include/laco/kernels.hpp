#pragma once

#include <cstddef>
#include <span>

// Dense compute kernels behind the autograd ops.
//
// Every kernel exists twice: a serial reference and an OpenMP version that
// splits the outermost output dimension across threads. Both visit the
// reduction index in the same order for every output element, so their
// results are bit-identical; the serial versions are kept for tests and
// for the benchmark in bench/.
//
// Matrices are row-major. "nn" is C = A*B, "tn" is C = A^T*B, "nt" is
// C = A*B^T. With accumulate=true the product is added into C.
namespace laco::kernels {

struct GemmDims {
  std::size_t m;  // rows of C
  std::size_t k;  // reduction length
  std::size_t n;  // cols of C
};

namespace serial {
void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void transpose(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out);
}  // namespace serial

namespace parallel {
void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void transpose(std::size_t rows, std::size_t cols, std::span<const double> in, std::span<double> out);
}  // namespace parallel

// Dispatching entry points: parallel when the problem is large enough, more
// than one thread is available and we are not already inside a parallel region.
void gemm_nn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_tn(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void gemm_nt(GemmDims d, std::span<const double> a, std::span<const double> b, std::span<double> c,
             bool accumulate);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// Work (multiply-adds) above which the dispatchers go parallel.
inline constexpr std::size_t kParallelThreshold = 1 << 16;

bool parallel_available();

}  // namespace laco::kernels
