#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "laco/autograd.hpp"

// Differentiable operations on Tape variables. Every op records a
// vector-Jacobian product on the tape of its first operand.
namespace laco {

// Inputs to log and cross-entropy are clamped into [kLogFloor, 1 - kLogFloor].
inline constexpr double kLogFloor = 1e-12;

// [m x k] * [k x n] -> [m x n]
Var matmul(Var a, Var b);
// [m x k] * [n x k]^T -> [m x n]
Var matmul_nt(Var a, Var b);
Var transpose(Var a);

enum class Unary { relu, tanh, sigmoid, gelu, log };
enum class Binary { add, sub, mul };

Var elementwise(Unary op, Var x);
// Operands must have equal rank; any axis may broadcast only when its size is 1.
Var elementwise(Binary op, Var a, Var b);

inline Var relu(Var x) { return elementwise(Unary::relu, x); }
inline Var tanh(Var x) { return elementwise(Unary::tanh, x); }
inline Var sigmoid(Var x) { return elementwise(Unary::sigmoid, x); }
inline Var gelu(Var x) { return elementwise(Unary::gelu, x); }
// Natural log with the input floored at kLogFloor.
inline Var log(Var x) { return elementwise(Unary::log, x); }
inline Var add(Var a, Var b) { return elementwise(Binary::add, a, b); }
inline Var sub(Var a, Var b) { return elementwise(Binary::sub, a, b); }
inline Var mul(Var a, Var b) { return elementwise(Binary::mul, a, b); }
Var scale(Var x, double factor);

Var sum(Var x);
Var reshape(Var x, Shape shape);
// Cuts the gradient path: a constant copy on the same tape.
Var detach(Var x);

// Row-wise softmax over a matrix (or a single vector). `keep`, when given,
// has one entry per column; columns with keep == 0 receive exactly zero weight.
Var softmax_rows(Var x, std::span<const unsigned char> keep = {});

// Row-wise layer normalization; gamma and beta hold one value per column.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-12);

// Row lookup: result row r is table row ids[r].
Var embedding(Var table, std::span<const int> ids);

Var slice_rows(Var x, std::size_t begin, std::size_t count);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var gather_rows(Var x, std::span<const std::size_t> rows);
Var concat_cols(std::span<const Var> parts);
// Column means as a 1 x k row.
Var mean_rows(Var x);
// Tiles a 1 x k row into count x k.
Var repeat_rows(Var row, std::size_t count);

// Unfolds an m x c input into m x (window*c) sliding blocks along the row
// axis with zeros outside [0, m). Row i holds input rows i-pad_left ...
// i-pad_left+window-1, each contributing c consecutive columns.
Var im2col(Var input, std::size_t window, std::size_t pad_left);

// Same-padded 1-D convolution along rows: output row i sees input rows
// [i - pad_left, i - pad_left + window). filters is (window*c) x F, bias 1 x F
// (bias may be an invalid Var). pad_left defaults to window / 2.
Var conv1d(Var input, std::size_t window, Var filters, Var bias);
Var conv1d(Var input, std::size_t window, std::size_t pad_left, Var filters, Var bias);

// Maximum along an axis, which is removed from the shape. The gradient goes
// to the first maximal element only.
Var max_pool_axis(Var x, std::size_t axis);

// -sum_i [t_i ln p_i + (1 - t_i) ln(1 - p_i)] with p clamped into
// [kLogFloor, 1 - kLogFloor]. Returns a scalar.
Var bce_sum(Var probs, std::span<const double> targets);

}  // namespace laco
