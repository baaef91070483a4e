#include "laco/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "laco/errors.hpp"
#include "laco/kernels.hpp"

namespace laco {

namespace {

void require_rank2(const Var& v, const char* op) {
  if (v.value().rank() != 2) {
    throw DimensionError(std::string(op) + " expects a matrix, got " + shape_str(v.shape()));
  }
}

void require_same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) throw std::logic_error("operands live on different tapes");
}

void accumulate(Tensor& dst, const Tensor& src) {
  kernels::axpy(1.0, src.data(), dst.data());
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul inner dimensions differ: " + shape_str(av.shape()) + " x " +
                         shape_str(bv.shape()));
  }
  const kernels::GemmDims d{av.dim(0), av.dim(1), bv.dim(1)};
  Tensor out(Shape{d.m, d.n});
  kernels::gemm_nn(d, av.data(), bv.data(), out.data(), false);
  Tape& tape = a.tape();
  const bool needs = a.requires_grad() || b.requires_grad();
  return tape.record(std::move(out), needs, [a, b, d](Tape& t, const Tensor& g) {
    if (a.requires_grad()) {
      // dA = G * B^T : [m x n] * [k x n]^T
      kernels::gemm_nt({d.m, d.n, d.k}, g.data(), b.value().data(), t.grad_of(a.id()).data(), true);
    }
    if (b.requires_grad()) {
      // dB = A^T * G : [m x k]^T * [m x n]
      kernels::gemm_tn({d.k, d.m, d.n}, a.value().data(), g.data(), t.grad_of(b.id()).data(), true);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  require_same_tape(a, b);
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.dim(1) != bv.dim(1)) {
    throw DimensionError("matmul_nt shared dimension differs: " + shape_str(av.shape()) + " x " +
                         shape_str(bv.shape()) + "^T");
  }
  const kernels::GemmDims d{av.dim(0), av.dim(1), bv.dim(0)};
  Tensor out(Shape{d.m, d.n});
  kernels::gemm_nt(d, av.data(), bv.data(), out.data(), false);
  const bool needs = a.requires_grad() || b.requires_grad();
  return a.tape().record(std::move(out), needs, [a, b, d](Tape& t, const Tensor& g) {
    if (a.requires_grad()) {
      // dA = G * B : [m x n] * [n x k]
      kernels::gemm_nn({d.m, d.n, d.k}, g.data(), b.value().data(), t.grad_of(a.id()).data(), true);
    }
    if (b.requires_grad()) {
      // dB = G^T * A : [m x n]^T * [m x k]
      kernels::gemm_tn({d.n, d.m, d.k}, g.data(), a.value().data(), t.grad_of(b.id()).data(), true);
    }
  });
}

Var transpose(Var a) {
  require_rank2(a, "transpose");
  const std::size_t r = a.value().dim(0), c = a.value().dim(1);
  Tensor out(Shape{c, r});
  kernels::serial::transpose(r, c, a.value().data(), out.data());
  return a.tape().record(std::move(out), a.requires_grad(), [a, r, c](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_of(a.id());
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  });
}

Var elementwise(Unary op, Var x) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  const std::size_t n = xv.size();
  switch (op) {
    case Unary::relu:
      for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] > 0.0 ? xv[i] : 0.0;
      break;
    case Unary::tanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(xv[i]);
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = xv[i];
        out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      }
      break;
    case Unary::gelu:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = xv[i];
        const double u = 0.7978845608028654 * (v + 0.044715 * v * v * v);
        out[i] = 0.5 * v * (1.0 + std::tanh(u));
      }
      break;
    case Unary::log:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::log(std::max(xv[i], kLogFloor));
      break;
  }
  auto backward = [x, op](Tape& t, const Tensor& g) {
    const Tensor& xv = x.value();
    Tensor& gx = t.grad_of(x.id());
    const std::size_t n = xv.size();
    switch (op) {
      case Unary::relu:
        for (std::size_t i = 0; i < n; ++i)
          if (xv[i] > 0.0) gx[i] += g[i];
        break;
      case Unary::tanh:
        for (std::size_t i = 0; i < n; ++i) {
          const double y = std::tanh(xv[i]);
          gx[i] += g[i] * (1.0 - y * y);
        }
        break;
      case Unary::sigmoid:
        for (std::size_t i = 0; i < n; ++i) {
          const double v = xv[i];
          const double y = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
          gx[i] += g[i] * y * (1.0 - y);
        }
        break;
      case Unary::gelu:
        for (std::size_t i = 0; i < n; ++i) {
          const double v = xv[i];
          const double u = 0.7978845608028654 * (v + 0.044715 * v * v * v);
          const double th = std::tanh(u);
          const double du = 0.7978845608028654 * (1.0 + 3.0 * 0.044715 * v * v);
          gx[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * du);
        }
        break;
      case Unary::log:
        for (std::size_t i = 0; i < n; ++i)
          if (xv[i] >= kLogFloor) gx[i] += g[i] / xv[i];
        break;
    }
  };
  return x.tape().record(std::move(out), x.requires_grad(), backward);
}

namespace {

// Strides of an operand viewed in the output's index space; broadcast axes get 0.
struct BroadcastPlan {
  Shape out_shape;
  std::vector<std::size_t> a_strides, b_strides;
};

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b) {
  if (a.size() != b.size()) {
    throw DimensionError("broadcast needs equal ranks: " + shape_str(a) + " vs " + shape_str(b));
  }
  BroadcastPlan p;
  const std::size_t r = a.size();
  p.out_shape.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (a[i] == b[i] || b[i] == 1) {
      p.out_shape[i] = a[i];
    } else if (a[i] == 1) {
      p.out_shape[i] = b[i];
    } else {
      throw DimensionError("shapes " + shape_str(a) + " and " + shape_str(b) + " do not broadcast");
    }
  }
  auto strides = [&](const Shape& s) {
    std::vector<std::size_t> st(r, 0);
    std::size_t acc = 1;
    for (std::size_t i = r; i-- > 0;) {
      st[i] = s[i] == 1 && p.out_shape[i] != 1 ? 0 : acc;
      acc *= s[i];
    }
    return st;
  };
  p.a_strides = strides(a);
  p.b_strides = strides(b);
  return p;
}

// Calls f(out_index, a_index, b_index) over every output element in row-major order.
template <typename F>
void for_each_broadcast(const BroadcastPlan& p, F&& f) {
  const std::size_t r = p.out_shape.size();
  const std::size_t total = shape_size(p.out_shape);
  if (total == 0) return;
  std::vector<std::size_t> idx(r, 0);
  std::size_t ai = 0, bi = 0;
  for (std::size_t o = 0; o < total; ++o) {
    f(o, ai, bi);
    for (std::size_t ax = r; ax-- > 0;) {
      ++idx[ax];
      ai += p.a_strides[ax];
      bi += p.b_strides[ax];
      if (idx[ax] < p.out_shape[ax]) break;
      ai -= p.a_strides[ax] * idx[ax];
      bi -= p.b_strides[ax] * idx[ax];
      idx[ax] = 0;
    }
  }
}

}  // namespace

Var elementwise(Binary op, Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out;
  const bool same = av.shape() == bv.shape();
  if (same) {
    out = Tensor(av.shape());
    const std::size_t n = av.size();
    switch (op) {
      case Binary::add:
        for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
        break;
      case Binary::sub:
        for (std::size_t i = 0; i < n; ++i) out[i] = av[i] - bv[i];
        break;
      case Binary::mul:
        for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
        break;
    }
    return a.tape().record(std::move(out), a.requires_grad() || b.requires_grad(),
                           [a, b, op](Tape& t, const Tensor& g) {
                             const std::size_t n = g.size();
                             if (a.requires_grad()) {
                               Tensor& ga = t.grad_of(a.id());
                               if (op == Binary::mul) {
                                 const Tensor& bv = b.value();
                                 for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
                               } else {
                                 for (std::size_t i = 0; i < n; ++i) ga[i] += g[i];
                               }
                             }
                             if (b.requires_grad()) {
                               Tensor& gb = t.grad_of(b.id());
                               if (op == Binary::mul) {
                                 const Tensor& av = a.value();
                                 for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
                               } else if (op == Binary::sub) {
                                 for (std::size_t i = 0; i < n; ++i) gb[i] -= g[i];
                               } else {
                                 for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
                               }
                             }
                           });
  }
  BroadcastPlan plan = plan_broadcast(av.shape(), bv.shape());
  out = Tensor(plan.out_shape);
  for_each_broadcast(plan, [&](std::size_t o, std::size_t ai, std::size_t bi) {
    switch (op) {
      case Binary::add: out[o] = av[ai] + bv[bi]; break;
      case Binary::sub: out[o] = av[ai] - bv[bi]; break;
      case Binary::mul: out[o] = av[ai] * bv[bi]; break;
    }
  });
  return a.tape().record(std::move(out), a.requires_grad() || b.requires_grad(),
                         [a, b, op, plan](Tape& t, const Tensor& g) {
                           const bool ga_on = a.requires_grad(), gb_on = b.requires_grad();
                           Tensor* ga = ga_on ? &t.grad_of(a.id()) : nullptr;
                           Tensor* gb = gb_on ? &t.grad_of(b.id()) : nullptr;
                           const Tensor& av = a.value();
                           const Tensor& bv = b.value();
                           for_each_broadcast(plan, [&](std::size_t o, std::size_t ai, std::size_t bi) {
                             const double go = g[o];
                             if (ga) (*ga)[ai] += op == Binary::mul ? go * bv[bi] : go;
                             if (gb) {
                               if (op == Binary::mul) (*gb)[bi] += go * av[ai];
                               else if (op == Binary::sub) (*gb)[bi] -= go;
                               else (*gb)[bi] += go;
                             }
                           });
                         });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  return x.tape().record(std::move(out), x.requires_grad(), [x, factor](Tape& t, const Tensor& g) {
    kernels::axpy(factor, g.data(), t.grad_of(x.id()).data());
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.tape().record(Tensor::scalar(s), x.requires_grad(), [x](Tape& t, const Tensor& g) {
    const double gv = g[0];
    for (double& v : t.grad_of(x.id()).data()) v += gv;
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), x.requires_grad(),
                         [x](Tape& t, const Tensor& g) { accumulate(t.grad_of(x.id()), g); });
}

Var detach(Var x) { return x.tape().constant(x.value()); }

Var softmax_rows(Var x, std::span<const unsigned char> keep) {
  const Tensor& xv = x.value();
  if (xv.rank() > 2) throw DimensionError("softmax_rows on " + shape_str(xv.shape()));
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (!keep.empty() && keep.size() != cols) {
    throw DimensionError("softmax mask has " + std::to_string(keep.size()) + " entries for " +
                         std::to_string(cols) + " columns");
  }
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.ptr() + r * cols;
    double* o = out.ptr() + r * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c)
      if (keep.empty() || keep[c]) mx = std::max(mx, in[c]);
    if (!std::isfinite(mx)) continue;  // every column masked
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      o[c] = keep.empty() || keep[c] ? std::exp(in[c] - mx) : 0.0;
      z += o[c];
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= z;
  }
  Tape& tape = x.tape();
  const bool needs = x.requires_grad();
  // The backward pass needs the output; capture it by node id after recording.
  auto holder = std::make_shared<std::uint32_t>(0);
  Var y = tape.record(std::move(out), needs, [x, holder, rows, cols](Tape& t, const Tensor& g) {
    const Tensor& yv = t.value(*holder);
    Tensor& gx = t.grad_of(x.id());
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = yv.ptr() + r * cols;
      const double* gr = g.ptr() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += yr[c] * gr[c];
      double* out = gx.ptr() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) out[c] += yr[c] * (gr[c] - dot);
    }
  });
  *holder = y.id();
  return y;
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  require_rank2(x, "layer_norm");
  const Tensor& xv = x.value();
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  if (gamma.value().size() != cols || beta.value().size() != cols) {
    throw DimensionError("layer_norm scale/shift " + shape_str(gamma.shape()) + "/" + shape_str(beta.shape()) +
                         " for input " + shape_str(xv.shape()));
  }
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  Tensor out(xv.shape());
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.ptr() + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += in[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const double h = (in[c] - mean) * inv_std[r];
      xhat[r * cols + c] = h;
      out[r * cols + c] = gv[c] * h + bv[c];
    }
  }
  const bool needs = x.requires_grad() || gamma.requires_grad() || beta.requires_grad();
  return x.tape().record(
      std::move(out), needs,
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), rows, cols](Tape& t, const Tensor& g) {
        const Tensor& gv = gamma.value();
        if (gamma.requires_grad()) {
          Tensor& gg = t.grad_of(gamma.id());
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gg[c] += g[r * cols + c] * xhat[r * cols + c];
        }
        if (beta.requires_grad()) {
          Tensor& gb = t.grad_of(beta.id());
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        }
        if (x.requires_grad()) {
          Tensor& gx = t.grad_of(x.id());
          const double inv_n = 1.0 / static_cast<double>(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gv[c];
              mean_d += d;
              mean_dx += d * xhat[r * cols + c];
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t c = 0; c < cols; ++c) {
              const double d = g[r * cols + c] * gv[c];
              gx[r * cols + c] += inv_std[r] * (d - mean_d - xhat[r * cols + c] * mean_dx);
            }
          }
        }
      });
}

Var embedding(Var table, std::span<const int> ids) {
  require_rank2(table, "embedding");
  const Tensor& tv = table.value();
  const std::size_t vocab = tv.dim(0), k = tv.dim(1);
  Tensor out(Shape{ids.size(), k});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab) {
      throw DimensionError("embedding id " + std::to_string(ids[r]) + " outside table of " +
                           std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.ptr() + static_cast<std::size_t>(ids[r]) * k, k, out.ptr() + r * k);
  }
  std::vector<int> id_copy(ids.begin(), ids.end());
  return table.tape().record(std::move(out), table.requires_grad(),
                             [table, id_copy = std::move(id_copy), k](Tape& t, const Tensor& g) {
                               Tensor& gt = t.grad_of(table.id());
                               for (std::size_t r = 0; r < id_copy.size(); ++r) {
                                 double* dst = gt.ptr() + static_cast<std::size_t>(id_copy[r]) * k;
                                 const double* src = g.ptr() + r * k;
                                 for (std::size_t c = 0; c < k; ++c) dst[c] += src[c];
                               }
                             });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  require_rank2(x, "slice_rows");
  const Tensor& xv = x.value();
  const std::size_t k = xv.dim(1);
  if (begin + count > xv.dim(0)) {
    throw DimensionError("row slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_str(xv.shape()));
  }
  Tensor out(Shape{count, k});
  std::copy_n(xv.ptr() + begin * k, count * k, out.ptr());
  return x.tape().record(std::move(out), x.requires_grad(), [x, begin, k](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_of(x.id());
    double* dst = gx.ptr() + begin * k;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  require_rank2(x, "slice_cols");
  const Tensor& xv = x.value();
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  if (begin + count > cols) {
    throw DimensionError("column slice [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_str(xv.shape()));
  }
  Tensor out(Shape{rows, count});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.ptr() + r * cols + begin, count, out.ptr() + r * count);
  return x.tape().record(std::move(out), x.requires_grad(),
                         [x, begin, count, rows, cols](Tape& t, const Tensor& g) {
                           Tensor& gx = t.grad_of(x.id());
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t c = 0; c < count; ++c) gx[r * cols + begin + c] += g[r * count + c];
                         });
}

Var gather_rows(Var x, std::span<const std::size_t> rows) {
  require_rank2(x, "gather_rows");
  const Tensor& xv = x.value();
  const std::size_t k = xv.dim(1);
  Tensor out(Shape{rows.size(), k});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= xv.dim(0)) {
      throw DimensionError("gather row " + std::to_string(rows[r]) + " outside " + shape_str(xv.shape()));
    }
    std::copy_n(xv.ptr() + rows[r] * k, k, out.ptr() + r * k);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return x.tape().record(std::move(out), x.requires_grad(), [x, idx = std::move(idx), k](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_of(x.id());
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t c = 0; c < k; ++c) gx[idx[r] * k + c] += g[r * k + c];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const std::size_t rows = parts[0].value().rows();
  std::size_t total = 0;
  bool needs = false;
  for (const Var& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.value().dim(0) != rows) {
      throw DimensionError("concat_cols row mismatch: " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
    }
    total += p.value().dim(1);
    needs = needs || p.requires_grad();
  }
  Tensor out(Shape{rows, total});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    const std::size_t c = pv.dim(1);
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(pv.ptr() + r * c, c, out.ptr() + r * total + offset);
    offset += c;
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), needs,
                                [inputs = std::move(inputs), rows, total](Tape& t, const Tensor& g) {
                                  std::size_t offset = 0;
                                  for (const Var& p : inputs) {
                                    const std::size_t c = p.value().dim(1);
                                    if (p.requires_grad()) {
                                      Tensor& gp = t.grad_of(p.id());
                                      for (std::size_t r = 0; r < rows; ++r)
                                        for (std::size_t j = 0; j < c; ++j) gp[r * c + j] += g[r * total + offset + j];
                                    }
                                    offset += c;
                                  }
                                });
}

Var mean_rows(Var x) {
  require_rank2(x, "mean_rows");
  const Tensor& xv = x.value();
  const std::size_t rows = xv.dim(0), k = xv.dim(1);
  if (rows == 0) throw DimensionError("mean_rows of an empty matrix");
  Tensor out(Shape{1, k});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < k; ++c) out[c] += xv[r * k + c];
  const double inv = 1.0 / static_cast<double>(rows);
  for (double& v : out.data()) v *= inv;
  return x.tape().record(std::move(out), x.requires_grad(), [x, rows, k, inv](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_of(x.id());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < k; ++c) gx[r * k + c] += g[c] * inv;
  });
}

Var repeat_rows(Var row, std::size_t count) {
  const Tensor& rv = row.value();
  if (rv.rank() != 2 || rv.dim(0) != 1) throw DimensionError("repeat_rows expects 1 x k, got " + shape_str(rv.shape()));
  const std::size_t k = rv.dim(1);
  Tensor out(Shape{count, k});
  for (std::size_t r = 0; r < count; ++r) std::copy_n(rv.ptr(), k, out.ptr() + r * k);
  return row.tape().record(std::move(out), row.requires_grad(), [row, count, k](Tape& t, const Tensor& g) {
    Tensor& gr = t.grad_of(row.id());
    for (std::size_t r = 0; r < count; ++r)
      for (std::size_t c = 0; c < k; ++c) gr[c] += g[r * k + c];
  });
}

Var im2col(Var input, std::size_t window, std::size_t pad_left) {
  require_rank2(input, "im2col");
  const Tensor& xv = input.value();
  const std::size_t m = xv.dim(0), c = xv.dim(1);
  if (window == 0) throw DimensionError("convolution window must be >= 1");
  if (pad_left >= window) throw DimensionError("left padding must be smaller than the window");
  const std::size_t padded = m + window - 1;
  if (window > padded) {
    throw DimensionError("window " + std::to_string(window) + " exceeds padded input length " +
                         std::to_string(padded));
  }
  const std::size_t width = window * c;
  Tensor out(Shape{m, width});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t w = 0; w < window; ++w) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + w) - static_cast<std::ptrdiff_t>(pad_left);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(m)) continue;
      std::copy_n(xv.ptr() + static_cast<std::size_t>(src) * c, c, out.ptr() + i * width + w * c);
    }
  }
  return input.tape().record(std::move(out), input.requires_grad(),
                             [input, window, pad_left, m, c, width](Tape& t, const Tensor& g) {
                               Tensor& gx = t.grad_of(input.id());
                               for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t w = 0; w < window; ++w) {
                                   const std::ptrdiff_t src =
                                       static_cast<std::ptrdiff_t>(i + w) - static_cast<std::ptrdiff_t>(pad_left);
                                   if (src < 0 || src >= static_cast<std::ptrdiff_t>(m)) continue;
                                   double* dst = gx.ptr() + static_cast<std::size_t>(src) * c;
                                   const double* from = g.ptr() + i * width + w * c;
                                   for (std::size_t j = 0; j < c; ++j) dst[j] += from[j];
                                 }
                               }
                             });
}

Var conv1d(Var input, std::size_t window, Var filters, Var bias) {
  return conv1d(input, window, window / 2, filters, bias);
}

Var conv1d(Var input, std::size_t window, std::size_t pad_left, Var filters, Var bias) {
  require_rank2(input, "conv1d");
  require_rank2(filters, "conv1d");
  const std::size_t c = input.value().dim(1);
  if (filters.value().dim(0) != window * c) {
    throw DimensionError("conv1d filters " + shape_str(filters.shape()) + " do not match window " +
                         std::to_string(window) + " over input " + shape_str(input.shape()));
  }
  Var out = matmul(im2col(input, window, pad_left), filters);
  if (bias.valid()) out = add(out, bias);
  return out;
}

Var max_pool_axis(Var x, std::size_t axis) {
  const Tensor& xv = x.value();
  if (xv.rank() == 0 || xv.rank() > 2 || axis >= xv.rank()) {
    throw DimensionError("max_pool_axis axis " + std::to_string(axis) + " invalid for " + shape_str(xv.shape()));
  }
  if (xv.dim(axis) == 0) throw DimensionError("max_pool_axis over an empty axis of " + shape_str(xv.shape()));
  const std::size_t rows = xv.rows(), cols = xv.cols();
  // Treat rank 1 as a single row; pooling over its only axis pools the row.
  const bool over_cols = xv.rank() == 1 || axis == 1;
  const std::size_t outer = over_cols ? rows : cols;
  const std::size_t inner = over_cols ? cols : rows;
  auto at = [&](std::size_t o, std::size_t i) { return over_cols ? o * cols + i : i * cols + o; };
  Tensor out(xv.rank() == 1 ? Shape{} : Shape{outer});
  std::vector<std::size_t> arg(outer);
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t best = at(o, 0);
    for (std::size_t i = 1; i < inner; ++i) {
      const std::size_t p = at(o, i);
      if (xv[p] > xv[best]) best = p;
    }
    arg[o] = best;
    out[o] = xv[best];
  }
  return x.tape().record(std::move(out), x.requires_grad(), [x, arg = std::move(arg)](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_of(x.id());
    for (std::size_t o = 0; o < arg.size(); ++o) gx[arg[o]] += g[o];
  });
}

Var bce_sum(Var probs, std::span<const double> targets) {
  const Tensor& pv = probs.value();
  if (pv.size() != targets.size()) {
    throw DimensionError("bce_sum: " + std::to_string(pv.size()) + " probabilities vs " +
                         std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = std::clamp(pv[i], kLogFloor, 1.0 - kLogFloor);
    loss -= targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
  }
  std::vector<double> q(targets.begin(), targets.end());
  return probs.tape().record(Tensor::scalar(loss), probs.requires_grad(),
                             [probs, q = std::move(q)](Tape& t, const Tensor& g) {
                               const Tensor& pv = probs.value();
                               Tensor& gp = t.grad_of(probs.id());
                               for (std::size_t i = 0; i < pv.size(); ++i) {
                                 const double p = pv[i];
                                 if (p < kLogFloor || p > 1.0 - kLogFloor) continue;
                                 gp[i] += g[0] * (-q[i] / p + (1.0 - q[i]) / (1.0 - p));
                               }
                             });
}

}  // namespace laco
