/* Copyright 2026 The TFWaveFormer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

// Differentiable primitives. Every function returns a new Tensor and, when
// gradient recording is active, attaches the analytic adjoint.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tfwf/tensor.hpp"

namespace tfwf {

namespace detail {

inline std::size_t normalize_axis(int axis, std::size_t rank, const char* op) {
  const int r = static_cast<int>(rank);
  if (axis < -r || axis >= r) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  return static_cast<std::size_t>(axis < 0 ? axis + r : axis);
}

inline Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw DimensionError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                           " are not broadcast-compatible");
    }
    out[i] = da == 1 ? db : da;
  }
  return out;
}

// True when `in`, stripped of leading unit axes, equals the trailing axes of
// `out`; the input element for flat output index o is then o % size(in).
inline bool is_suffix(const Shape& in, const Shape& out) {
  std::size_t start = 0;
  while (start < in.size() && in[start] == 1) ++start;
  const std::size_t k = in.size() - start;
  if (k > out.size()) return false;
  return std::equal(in.begin() + static_cast<std::ptrdiff_t>(start), in.end(),
                    out.end() - static_cast<std::ptrdiff_t>(k));
}

inline std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t stride = 1;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::size_t axis_in = in.size() - 1 - i;
    const std::size_t axis_out = out.size() - 1 - i;
    strides[axis_out] = in[axis_in] == 1 ? 0 : stride;
    stride *= in[axis_in];
  }
  return strides;
}

// Calls f(o, ia, ib) for each flat output index o with the matching flat
// indices into broadcast operands of shapes sa and sb.
template <class F>
void for_each_broadcast(const Shape& out, const Shape& sa, const Shape& sb, F&& f) {
  const std::size_t n = shape_size(out);
  if (n == 0) return;
  const std::size_t na = shape_size(sa);
  const std::size_t nb = shape_size(sb);
  const bool a_same = sa == out;
  const bool b_same = sb == out;
  if (a_same && b_same) {
    for (std::size_t o = 0; o < n; ++o) f(o, o, o);
    return;
  }
  if (a_same && is_suffix(sb, out)) {
    for (std::size_t o0 = 0; o0 < n; o0 += nb)
      for (std::size_t j = 0; j < nb; ++j) f(o0 + j, o0 + j, j);
    return;
  }
  if (b_same && is_suffix(sa, out)) {
    for (std::size_t o0 = 0; o0 < n; o0 += na)
      for (std::size_t j = 0; j < na; ++j) f(o0 + j, j, o0 + j);
    return;
  }
  const auto st_a = broadcast_strides(sa, out);
  const auto st_b = broadcast_strides(sb, out);
  std::vector<std::size_t> idx(out.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t o = 0; o < n; ++o) {
    f(o, ia, ib);
    for (std::size_t ax = out.size(); ax-- > 0;) {
      ++idx[ax];
      ia += st_a[ax];
      ib += st_b[ax];
      if (idx[ax] < out[ax]) break;
      ia -= st_a[ax] * out[ax];
      ib -= st_b[ax] * out[ax];
      idx[ax] = 0;
    }
  }
}

// C += op(A) * op(B) for row-major operands, op(A): [M,K], op(B): [K,N].
// A transposed operand is stored with its dimensions swapped.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  if (m == 0 || n == 0 || k == 0) return;
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const Mat>;
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::Map<Mat> cm(c, M, N);
  const ConstMap am(a, trans_a ? K : M, trans_a ? M : K);
  const ConstMap bm(b, trans_b ? N : K, trans_b ? K : N);
  if (trans_a && trans_b) cm.noalias() += am.transpose() * bm.transpose();
  else if (trans_a) cm.noalias() += am.transpose() * bm;
  else if (trans_b) cm.noalias() += am * bm.transpose();
  else cm.noalias() += am * bm;
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t len = 1;
  std::size_t inner = 1;
};

inline AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

template <typename T, class Fwd, class Deriv>
Tensor<T> unary(const char* op, const Tensor<T>& x, Fwd fwd, Deriv deriv) {
  std::vector<T> out(x.size());
  const auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xs[i]);
  return make_result<T>(op, x.shape(), std::move(out), {x}, [deriv](Node<T>& self) {
    auto* gx = parent_grad(self, 0);
    if (!gx) return;
    const auto& xd = self.parents[0]->data;
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * deriv(xd[i], self.data[i]);
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise binary operations with broadcasting.

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape out_shape = detail::broadcast_shape(a.shape(), b.shape(), "add");
  std::vector<T> out(shape_size(out_shape));
  const auto ad = a.data();
  const auto bd = b.data();
  detail::for_each_broadcast(out_shape, a.shape(), b.shape(),
                             [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = ad[ia] + bd[ib]; });
  return detail::make_result<T>("add", out_shape, std::move(out), {a, b}, [](Node<T>& self) {
    auto* ga = detail::parent_grad(self, 0);
    auto* gb = detail::parent_grad(self, 1);
    const auto& g = *self.grad;
    detail::for_each_broadcast(self.shape, self.parents[0]->shape, self.parents[1]->shape,
                               [&](std::size_t o, std::size_t ia, std::size_t ib) {
                                 if (ga) (*ga)[ia] += g[o];
                                 if (gb) (*gb)[ib] += g[o];
                               });
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape out_shape = detail::broadcast_shape(a.shape(), b.shape(), "sub");
  std::vector<T> out(shape_size(out_shape));
  const auto ad = a.data();
  const auto bd = b.data();
  detail::for_each_broadcast(out_shape, a.shape(), b.shape(),
                             [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = ad[ia] - bd[ib]; });
  return detail::make_result<T>("sub", out_shape, std::move(out), {a, b}, [](Node<T>& self) {
    auto* ga = detail::parent_grad(self, 0);
    auto* gb = detail::parent_grad(self, 1);
    const auto& g = *self.grad;
    detail::for_each_broadcast(self.shape, self.parents[0]->shape, self.parents[1]->shape,
                               [&](std::size_t o, std::size_t ia, std::size_t ib) {
                                 if (ga) (*ga)[ia] += g[o];
                                 if (gb) (*gb)[ib] -= g[o];
                               });
  });
}

// Hadamard product.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape out_shape = detail::broadcast_shape(a.shape(), b.shape(), "mul");
  std::vector<T> out(shape_size(out_shape));
  const auto ad = a.data();
  const auto bd = b.data();
  detail::for_each_broadcast(out_shape, a.shape(), b.shape(),
                             [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = ad[ia] * bd[ib]; });
  return detail::make_result<T>("mul", out_shape, std::move(out), {a, b}, [](Node<T>& self) {
    auto* ga = detail::parent_grad(self, 0);
    auto* gb = detail::parent_grad(self, 1);
    const auto& g = *self.grad;
    const auto& ad = self.parents[0]->data;
    const auto& bd = self.parents[1]->data;
    detail::for_each_broadcast(self.shape, self.parents[0]->shape, self.parents[1]->shape,
                               [&](std::size_t o, std::size_t ia, std::size_t ib) {
                                 if (ga) (*ga)[ia] += g[o] * bd[ib];
                                 if (gb) (*gb)[ib] += g[o] * ad[ia];
                               });
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return detail::unary<T>(
      "scale", x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T offset) {
  return detail::unary<T>(
      "add_scalar", x, [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> broadcast_to(const Tensor<T>& x, const Shape& shape) {
  const Shape out_shape = detail::broadcast_shape(x.shape(), shape, "broadcast_to");
  if (out_shape != shape) {
    throw DimensionError("broadcast_to: cannot broadcast " + shape_str(x.shape()) + " to " +
                         shape_str(shape));
  }
  std::vector<T> out(shape_size(shape));
  const auto xd = x.data();
  detail::for_each_broadcast(shape, x.shape(), shape,
                             [&](std::size_t o, std::size_t ix, std::size_t) { out[o] = xd[ix]; });
  return detail::make_result<T>("broadcast_to", shape, std::move(out), {x}, [](Node<T>& self) {
    auto* gx = detail::parent_grad(self, 0);
    if (!gx) return;
    const auto& g = *self.grad;
    detail::for_each_broadcast(self.shape, self.parents[0]->shape, self.shape,
                               [&](std::size_t o, std::size_t ix, std::size_t) { (*gx)[ix] += g[o]; });
  });
}

// ---------------------------------------------------------------------------
// Elementwise unary operations.

template <typename T>
Tensor<T> exp(const Tensor<T>& x) {
  return detail::unary<T>(
      "exp", x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x) {
  return detail::unary<T>(
      "log", x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <typename T>
Tensor<T> cos(const Tensor<T>& x) {
  return detail::unary<T>(
      "cos", x, [](T v) { return std::cos(v); }, [](T v, T) { return -std::sin(v); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return detail::unary<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

// Exact Gauss error-function GELU.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  return detail::unary<T>(
      "gelu", x,
      [](T v) {
        const double d = v;
        return static_cast<T>(0.5 * d * (1.0 + std::erf(d / std::numbers::sqrt2)));
      },
      [](T v, T) {
        const double d = v;
        const double cdf = 0.5 * (1.0 + std::erf(d / std::numbers::sqrt2));
        const double pdf = std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi);
        return static_cast<T>(cdf + d * pdf);
      });
}

// log(1 + exp(x)) evaluated as max(x, 0) + log1p(exp(-|x|)).
template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  return detail::unary<T>(
      "softplus", x,
      [](T v) {
        const double d = v;
        return static_cast<T>(std::max(d, 0.0) + std::log1p(std::exp(-std::abs(d))));
      },
      [](T v, T) {
        const double d = v;
        return static_cast<T>(d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d)));
      });
}

// ---------------------------------------------------------------------------
// Shape manipulation.

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return detail::make_result<T>("reshape", std::move(shape), std::move(out), {x}, [](Node<T>& self) {
    auto* gx = detail::parent_grad(self, 0);
    if (!gx) return;
    const auto& g = *self.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i];
  });
}

// Swaps the last two axes.
template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  if (x.rank() < 2) throw DimensionError("transpose: needs rank >= 2, got " + shape_str(x.shape()));
  const std::size_t rows = x.dim(x.rank() - 2);
  const std::size_t cols = x.dim(x.rank() - 1);
  const std::size_t batch = x.size() / std::max<std::size_t>(rows * cols, 1);
  Shape out_shape = x.shape();
  std::swap(out_shape[out_shape.size() - 2], out_shape[out_shape.size() - 1]);
  std::vector<T> out(x.size());
  const auto xd = x.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out[b * rows * cols + j * rows + i] = xd[b * rows * cols + i * cols + j];
  return detail::make_result<T>("transpose", std::move(out_shape), std::move(out), {x},
                                [rows, cols, batch](Node<T>& self) {
                                  auto* gx = detail::parent_grad(self, 0);
                                  if (!gx) return;
                                  const auto& g = *self.grad;
                                  for (std::size_t b = 0; b < batch; ++b)
                                    for (std::size_t i = 0; i < rows; ++i)
                                      for (std::size_t j = 0; j < cols; ++j)
                                        (*gx)[b * rows * cols + i * cols + j] += g[b * rows * cols + j * rows + i];
                                });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  const std::size_t ax = detail::normalize_axis(axis, parts[0].rank(), "concat");
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != out_shape.size()) {
      throw DimensionError("concat: shapes " + shape_str(parts[0].shape()) + " and " + shape_str(p.shape()) +
                           " differ in rank");
    }
    probe[ax] = 0;
    Shape ref = parts[0].shape();
    ref[ax] = 0;
    if (probe != ref) {
      throw DimensionError("concat: shapes " + shape_str(parts[0].shape()) + " and " + shape_str(p.shape()) +
                           " differ off the concatenation axis");
    }
    out_shape[ax] += p.dim(ax);
  }
  const auto split = detail::split_axis(out_shape, ax);
  std::vector<T> out(shape_size(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t len = p.dim(ax);
    const auto pd = p.data();
    for (std::size_t o = 0; o < split.outer; ++o)
      std::copy_n(pd.begin() + static_cast<std::ptrdiff_t>(o * len * split.inner), len * split.inner,
                  out.begin() + static_cast<std::ptrdiff_t>((o * split.len + offset) * split.inner));
    offset += len;
  }
  return detail::make_result<T>("concat", out_shape, std::move(out), parts, [split, offsets, ax](Node<T>& self) {
    const auto& g = *self.grad;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      auto* gp = detail::parent_grad(self, k);
      if (!gp) continue;
      const std::size_t len = self.parents[k]->shape[ax];
      for (std::size_t o = 0; o < split.outer; ++o)
        for (std::size_t r = 0; r < len * split.inner; ++r)
          (*gp)[o * len * split.inner + r] += g[(o * split.len + offsets[k]) * split.inner + r];
    }
  });
}

// Elements [begin, end) along `axis`.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::size_t begin, std::size_t end) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank(), "slice");
  if (begin > end || end > x.dim(ax)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for shape " + shape_str(x.shape()));
  }
  const auto split = detail::split_axis(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = end - begin;
  const std::size_t len = end - begin;
  std::vector<T> out(shape_size(out_shape));
  const auto xd = x.data();
  for (std::size_t o = 0; o < split.outer; ++o)
    std::copy_n(xd.begin() + static_cast<std::ptrdiff_t>((o * split.len + begin) * split.inner), len * split.inner,
                out.begin() + static_cast<std::ptrdiff_t>(o * len * split.inner));
  return detail::make_result<T>("slice", std::move(out_shape), std::move(out), {x},
                                [split, begin, len](Node<T>& self) {
                                  auto* gx = detail::parent_grad(self, 0);
                                  if (!gx) return;
                                  const auto& g = *self.grad;
                                  for (std::size_t o = 0; o < split.outer; ++o)
                                    for (std::size_t r = 0; r < len * split.inner; ++r)
                                      (*gx)[(o * split.len + begin) * split.inner + r] += g[o * len * split.inner + r];
                                });
}

// Rows of a rank>=1 tensor selected along axis 0 (repeats allowed).
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, std::vector<std::size_t> rows) {
  if (x.rank() < 1) throw DimensionError("gather_rows: scalar input");
  const std::size_t width = x.size() / std::max<std::size_t>(x.dim(0), 1);
  Shape out_shape = x.shape();
  out_shape[0] = rows.size();
  std::vector<T> out(rows.size() * width);
  const auto xd = x.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.dim(0)) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[r]) + " out of range for shape " +
                           shape_str(x.shape()));
    }
    std::copy_n(xd.begin() + static_cast<std::ptrdiff_t>(rows[r] * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  return detail::make_result<T>("gather_rows", std::move(out_shape), std::move(out), {x},
                                [rows = std::move(rows), width](Node<T>& self) {
                                  auto* gx = detail::parent_grad(self, 0);
                                  if (!gx) return;
                                  const auto& g = *self.grad;
                                  for (std::size_t r = 0; r < rows.size(); ++r)
                                    for (std::size_t c = 0; c < width; ++c) (*gx)[rows[r] * width + c] += g[r * width + c];
                                });
}

// ---------------------------------------------------------------------------
// Linear algebra.

// Supported forms: [..., M, K] x [K, N] and batched [B, M, K] x [B, K, N].
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const auto fail = [&] {
    throw DimensionError("matmul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                         " are incompatible");
  };
  if (a.rank() < 2 || b.rank() < 2) fail();
  const std::size_t k = a.dim(a.rank() - 1);
  std::size_t batch = 1;
  std::size_t m = 0;
  std::size_t n = 0;
  bool batched = false;
  Shape out_shape;
  if (b.rank() == 2) {
    if (b.dim(0) != k) fail();
    n = b.dim(1);
    m = k == 0 ? shape_size(Shape(a.shape().begin(), a.shape().end() - 1)) : a.size() / k;
    out_shape = a.shape();
    out_shape.back() = n;
  } else if (a.rank() == 3 && b.rank() == 3) {
    if (a.dim(0) != b.dim(0) || b.dim(1) != k) fail();
    batched = true;
    batch = a.dim(0);
    m = a.dim(1);
    n = b.dim(2);
    out_shape = {batch, m, n};
  } else {
    fail();
  }
  std::vector<T> out(batch * m * n, T(0));
  const T* ad = a.data().data();
  const T* bd = b.data().data();
  for (std::size_t p = 0; p < batch; ++p)
    detail::gemm(false, false, m, n, k, ad + p * m * k, bd + (batched ? p * k * n : 0), out.data() + p * m * n);
  return detail::make_result<T>(
      "matmul", std::move(out_shape), std::move(out), {a, b}, [batch, m, n, k, batched](Node<T>& self) {
        auto* ga = detail::parent_grad(self, 0);
        auto* gb = detail::parent_grad(self, 1);
        const auto& g = *self.grad;
        const T* ad = self.parents[0]->data.data();
        const T* bd = self.parents[1]->data.data();
        for (std::size_t p = 0; p < batch; ++p) {
          const T* gp = g.data() + p * m * n;
          const T* bp = bd + (batched ? p * k * n : 0);
          if (ga) detail::gemm(false, true, m, k, n, gp, bp, ga->data() + p * m * k);
          if (gb) detail::gemm(true, false, k, n, m, ad + p * m * k, gp, gb->data() + (batched ? p * k * n : 0));
        }
      });
}

// ---------------------------------------------------------------------------
// Reductions (64-bit accumulation).

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  double acc = 0.0;
  for (T v : x.data()) acc += v;
  return detail::make_result<T>("sum", {}, {static_cast<T>(acc)}, {x}, [](Node<T>& self) {
    auto* gx = detail::parent_grad(self, 0);
    if (!gx) return;
    const T g = (*self.grad)[0];
    for (auto& v : *gx) v += g;
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x, int axis, bool keepdim = false) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank(), "sum");
  const auto split = detail::split_axis(x.shape(), ax);
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  }
  std::vector<T> out(split.outer * split.inner);
  const auto xd = x.data();
  for (std::size_t o = 0; o < split.outer; ++o)
    for (std::size_t i = 0; i < split.inner; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < split.len; ++j) acc += xd[(o * split.len + j) * split.inner + i];
      out[o * split.inner + i] = static_cast<T>(acc);
    }
  return detail::make_result<T>("sum_axis", std::move(out_shape), std::move(out), {x}, [split](Node<T>& self) {
    auto* gx = detail::parent_grad(self, 0);
    if (!gx) return;
    const auto& g = *self.grad;
    for (std::size_t o = 0; o < split.outer; ++o)
      for (std::size_t j = 0; j < split.len; ++j)
        for (std::size_t i = 0; i < split.inner; ++i)
          (*gx)[(o * split.len + j) * split.inner + i] += g[o * split.inner + i];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.size() == 0) throw ContractError("mean of empty tensor");
  return scale(sum(x), static_cast<T>(1.0 / static_cast<double>(x.size())));
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x, int axis, bool keepdim = false) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank(), "mean");
  if (x.dim(ax) == 0) throw ContractError("mean over empty axis");
  return scale(sum(x, axis, keepdim), static_cast<T>(1.0 / static_cast<double>(x.dim(ax))));
}

// ---------------------------------------------------------------------------
// Normalizations.

// softmax(x / temperature) along `axis`.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis, T temperature = T(1)) {
  if (!(temperature > T(0))) {
    throw ParameterError("softmax: temperature must be > 0, got " + std::to_string(static_cast<double>(temperature)));
  }
  const std::size_t ax = detail::normalize_axis(axis, x.rank(), "softmax");
  const auto split = detail::split_axis(x.shape(), ax);
  std::vector<T> out(x.size());
  const auto xd = x.data();
  const double inv_tau = 1.0 / static_cast<double>(temperature);
  std::vector<double> row(split.len);
  for (std::size_t o = 0; o < split.outer; ++o)
    for (std::size_t i = 0; i < split.inner; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < split.len; ++j) {
        row[j] = static_cast<double>(xd[(o * split.len + j) * split.inner + i]) * inv_tau;
        mx = std::max(mx, row[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < split.len; ++j) {
        row[j] = std::exp(row[j] - mx);
        total += row[j];
      }
      for (std::size_t j = 0; j < split.len; ++j)
        out[(o * split.len + j) * split.inner + i] = static_cast<T>(row[j] / total);
    }
  return detail::make_result<T>("softmax", x.shape(), std::move(out), {x}, [split, inv_tau](Node<T>& self) {
    auto* gx = detail::parent_grad(self, 0);
    if (!gx) return;
    const auto& g = *self.grad;
    const auto& y = self.data;
    for (std::size_t o = 0; o < split.outer; ++o)
      for (std::size_t i = 0; i < split.inner; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < split.len; ++j) {
          const std::size_t at = (o * split.len + j) * split.inner + i;
          dot += static_cast<double>(g[at]) * y[at];
        }
        for (std::size_t j = 0; j < split.len; ++j) {
          const std::size_t at = (o * split.len + j) * split.inner + i;
          (*gx)[at] += static_cast<T>(inv_tau * y[at] * (g[at] - dot));
        }
      }
  });
}

// (x - mean) / sqrt(var + eps) along `axis`, without affine terms.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, int axis = -1, double eps = 1e-5) {
  const std::size_t ax = detail::normalize_axis(axis, x.rank(), "layer_norm");
  const auto split = detail::split_axis(x.shape(), ax);
  std::vector<T> out(x.size());
  std::vector<T> inv_std(split.outer * split.inner);
  const auto xd = x.data();
  for (std::size_t o = 0; o < split.outer; ++o)
    for (std::size_t i = 0; i < split.inner; ++i) {
      double mu = 0.0;
      for (std::size_t j = 0; j < split.len; ++j) mu += xd[(o * split.len + j) * split.inner + i];
      mu /= static_cast<double>(split.len);
      double var = 0.0;
      for (std::size_t j = 0; j < split.len; ++j) {
        const double c = xd[(o * split.len + j) * split.inner + i] - mu;
        var += c * c;
      }
      var /= static_cast<double>(split.len);
      const double rs = 1.0 / std::sqrt(var + eps);
      inv_std[o * split.inner + i] = static_cast<T>(rs);
      for (std::size_t j = 0; j < split.len; ++j) {
        const std::size_t at = (o * split.len + j) * split.inner + i;
        out[at] = static_cast<T>((xd[at] - mu) * rs);
      }
    }
  return detail::make_result<T>(
      "layer_norm", x.shape(), std::move(out), {x}, [split, inv_std = std::move(inv_std)](Node<T>& self) {
        auto* gx = detail::parent_grad(self, 0);
        if (!gx) return;
        const auto& g = *self.grad;
        const auto& y = self.data;
        const double n = static_cast<double>(split.len);
        for (std::size_t o = 0; o < split.outer; ++o)
          for (std::size_t i = 0; i < split.inner; ++i) {
            double g_mean = 0.0;
            double gy_mean = 0.0;
            for (std::size_t j = 0; j < split.len; ++j) {
              const std::size_t at = (o * split.len + j) * split.inner + i;
              g_mean += g[at];
              gy_mean += static_cast<double>(g[at]) * y[at];
            }
            g_mean /= n;
            gy_mean /= n;
            const double rs = inv_std[o * split.inner + i];
            for (std::size_t j = 0; j < split.len; ++j) {
              const std::size_t at = (o * split.len + j) * split.inner + i;
              (*gx)[at] += static_cast<T>(rs * (g[at] - g_mean - y[at] * gy_mean));
            }
          }
      });
}

}  // namespace tfwf
