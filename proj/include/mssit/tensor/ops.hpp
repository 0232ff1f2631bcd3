#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/rng.hpp"
#include "mssit/tensor/tape.hpp"
#include "mssit/tensor/tensor.hpp"

namespace mssit {

namespace kern {

// C[m x n] += A[m x k] * B[k x n]. The i-k-j ordering keeps the inner loop a
// stride-1 saxpy, which vectorises without reassociating any reduction, so
// results are bit-stable regardless of optimisation level.
template <typename T>
void mm_nn(T* __restrict c, const T* __restrict a, const T* __restrict b,
           std::size_t m, std::size_t k, std::size_t n) {
  parallel_for(m, [=](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      T* crow = c + i * n;
      const T* arow = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const T av = arow[p];
        if (av == T{0}) continue;
        const T* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  });
}

template <typename T>
void transpose(T* __restrict dst, const T* __restrict src, std::size_t rows,
               std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
}

}  // namespace kern

namespace detail {

template <typename T>
bool track(const Tape<T>* tape, const Tensor<T>& a) {
  return tape != nullptr && a.requires_grad();
}
template <typename T>
bool track(const Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  return tape != nullptr && (a.requires_grad() || b.requires_grad());
}

template <typename T>
void axpy(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Leading dimensions collapsed to rows, last dimension as columns.
inline std::pair<std::size_t, std::size_t> rows_cols(const Shape& s) {
  std::size_t cols = s.back();
  return {shape_numel(s) / cols, cols};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// matmul: [m,k]x[k,n] or batched [B,m,k]x[B,k,n].
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> matmul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.rank() == b.rank() && (a.rank() == 2 || a.rank() == 3),
          "matmul expects two rank-2 or two rank-3 tensors");
  std::size_t batch = 1, m, k, n;
  if (a.rank() == 3) {
    require(a.size(0) == b.size(0), "matmul: batch dims differ");
    batch = a.size(0);
    m = a.size(1), k = a.size(2), n = b.size(2);
    require(b.size(1) == k, "matmul: inner dims differ");
  } else {
    m = a.size(0), k = a.size(1), n = b.size(1);
    require(b.size(0) == k, "matmul: inner dims differ");
  }
  Shape out_shape = a.rank() == 3 ? Shape{batch, m, n} : Shape{m, n};
  Tensor<T> out = Tensor<T>::zeros(out_shape);
  for (std::size_t s = 0; s < batch; ++s)
    kern::mm_nn(out.data() + s * m * n, a.data() + s * m * k, b.data() + s * k * n,
                m, k, n);

  if (detail::track(tape, a, b)) {
    out.set_requires_grad();
    Tensor<T> av = a, bv = b, ov = out;
    tape->record([av, bv, ov, batch, m, k, n]() mutable {
      const std::vector<T>& go = ov.grad();
      std::vector<T> tmp(std::max(k * n, m * k));
      if (av.requires_grad()) {
        std::vector<T>& ga = av.grad();
        for (std::size_t s = 0; s < batch; ++s) {
          kern::transpose(tmp.data(), bv.data() + s * k * n, k, n);  // B^T [n,k]
          kern::mm_nn(ga.data() + s * m * k, go.data() + s * m * n, tmp.data(), m, n, k);
        }
      }
      if (bv.requires_grad()) {
        std::vector<T>& gb = bv.grad();
        for (std::size_t s = 0; s < batch; ++s) {
          kern::transpose(tmp.data(), av.data() + s * m * k, m, k);  // A^T [k,m]
          kern::mm_nn(gb.data() + s * k * n, tmp.data(), go.data() + s * m * n, k, m, n);
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// add: elementwise, identical shapes. embedding_add is this op with a
// parameter table as one operand.
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> add(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: shapes differ");
  Tensor<T> out = a.clone();
  out.set_requires_grad(false);
  detail::axpy(out.values(), b.values());
  if (detail::track(tape, a, b)) {
    out.set_requires_grad();
    Tensor<T> av = a, bv = b, ov = out;
    tape->record([av, bv, ov]() mutable {
      if (av.requires_grad()) detail::axpy(av.grad(), ov.grad());
      if (bv.requires_grad()) detail::axpy(bv.grad(), ov.grad());
    });
  }
  return out;
}

// Row-wise bias: a[.. x d] + bias[d]. The only broadcast in the op set.
template <typename T>
Tensor<T> add_rowvec(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& bias) {
  require(bias.rank() == 1 && bias.size(0) == a.shape().back(),
          "add_rowvec: bias width mismatch");
  const auto [rows, cols] = detail::rows_cols(a.shape());
  Tensor<T> out = a.clone();
  out.set_requires_grad(false);
  for (std::size_t i = 0; i < rows; ++i) {
    T* row = out.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += bias.data()[j];
  }
  if (detail::track(tape, a, bias)) {
    out.set_requires_grad();
    Tensor<T> av = a, bv = bias, ov = out;
    tape->record([av, bv, ov, rows, cols]() mutable {
      if (av.requires_grad()) detail::axpy(av.grad(), ov.grad());
      if (bv.requires_grad()) {
        std::vector<T>& gb = bv.grad();
        const std::vector<T>& go = ov.grad();
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < cols; ++j) gb[j] += go[i * cols + j];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tape<T>* tape, const Tensor<T>& a, T s) {
  Tensor<T> out = a.clone();
  out.set_requires_grad(false);
  for (T& v : out.values()) v *= s;
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, s]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * go[i];
    });
  }
  return out;
}

template <typename T>
Tensor<T> transpose_last2(Tape<T>* tape, const Tensor<T>& a) {
  require(a.rank() >= 2, "transpose_last2: rank must be >= 2");
  Shape s = a.shape();
  const std::size_t rows = s[s.size() - 2], cols = s[s.size() - 1];
  const std::size_t batch = a.numel() / (rows * cols);
  std::swap(s[s.size() - 2], s[s.size() - 1]);
  Tensor<T> out = Tensor<T>::zeros(s);
  for (std::size_t b = 0; b < batch; ++b)
    kern::transpose(out.data() + b * rows * cols, a.data() + b * rows * cols, rows, cols);
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, batch, rows, cols]() mutable {
      std::vector<T> tmp(rows * cols);
      for (std::size_t b = 0; b < batch; ++b) {
        kern::transpose(tmp.data(), ov.grad().data() + b * rows * cols, cols, rows);
        T* ga = av.grad().data() + b * rows * cols;
        for (std::size_t i = 0; i < rows * cols; ++i) ga[i] += tmp[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& a, Shape shape) {
  require(shape_numel(shape) == a.numel(), "reshape: element count mismatch");
  Tensor<T> out = Tensor<T>::from(std::move(shape), a.values());
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov]() mutable { detail::axpy(av.grad(), ov.grad()); });
  }
  return out;
}

// out row i = a row idx[i]; duplicate indices accumulate on backward.
template <typename T>
Tensor<T> gather_rows(Tape<T>* tape, const Tensor<T>& a,
                      const std::vector<std::uint32_t>& idx) {
  require(a.rank() == 2, "gather_rows expects a rank-2 tensor");
  const std::size_t cols = a.size(1);
  Tensor<T> out = Tensor<T>::zeros({idx.size(), cols});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] < a.size(0), "gather_rows: index out of range");
    std::copy_n(a.data() + std::size_t{idx[i]} * cols, cols, out.data() + i * cols);
  }
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, idx, cols]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j)
          ga[std::size_t{idx[i]} * cols + j] += go[i * cols + j];
    });
  }
  return out;
}

// Column slice [rows x len] out of [rows x cols].
template <typename T>
Tensor<T> slice_cols(Tape<T>* tape, const Tensor<T>& a, std::size_t start,
                     std::size_t len) {
  require(a.rank() == 2, "slice_cols expects a rank-2 tensor");
  const std::size_t rows = a.size(0), cols = a.size(1);
  require(start + len <= cols, "slice_cols: slice out of range");
  Tensor<T> out = Tensor<T>::zeros({rows, len});
  for (std::size_t i = 0; i < rows; ++i)
    std::copy_n(a.data() + i * cols + start, len, out.data() + i * len);
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, rows, cols, start, len]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < len; ++j) ga[i * cols + start + j] += go[i * len + j];
    });
  }
  return out;
}

// Equal-width split along the last axis.
template <typename T>
std::vector<Tensor<T>> split_last(Tape<T>* tape, const Tensor<T>& a, std::size_t parts) {
  require(parts >= 1 && a.shape().back() % parts == 0,
          "split_last: channel dim not divisible");
  const std::size_t width = a.shape().back() / parts;
  std::vector<Tensor<T>> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) out.push_back(slice_cols(tape, a, p * width, width));
  return out;
}

// Concatenation along the last axis of rank-2 tensors with equal row counts.
template <typename T>
Tensor<T> concat_last(Tape<T>* tape, const std::vector<Tensor<T>>& parts) {
  require(!parts.empty(), "concat_last: empty input");
  const std::size_t rows = parts[0].size(0);
  std::size_t cols = 0;
  bool any_grad = false;
  for (const auto& p : parts) {
    require(p.rank() == 2 && p.size(0) == rows, "concat_last: row counts differ");
    cols += p.size(1);
    any_grad = any_grad || p.requires_grad();
  }
  Tensor<T> out = Tensor<T>::zeros({rows, cols});
  std::size_t off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.size(1);
    for (std::size_t i = 0; i < rows; ++i)
      std::copy_n(p.data() + i * w, w, out.data() + i * cols + off);
    off += w;
  }
  if (tape != nullptr && any_grad) {
    out.set_requires_grad();
    std::vector<Tensor<T>> pv = parts;
    Tensor<T> ov = out;
    tape->record([pv, ov, rows, cols]() mutable {
      const std::vector<T>& go = ov.grad();
      std::size_t off = 0;
      for (auto& p : pv) {
        const std::size_t w = p.size(1);
        if (p.requires_grad()) {
          std::vector<T>& gp = p.grad();
          for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < w; ++j) gp[i * w + j] += go[i * cols + off + j];
        }
        off += w;
      }
    });
  }
  return out;
}

// Numerically stable softmax over the last axis.
template <typename T>
Tensor<T> softmax_last(Tape<T>* tape, const Tensor<T>& a) {
  require(a.rank() >= 1 && a.shape().back() > 0, "softmax over empty axis");
  const auto [rows, cols] = detail::rows_cols(a.shape());
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const T* x = a.data() + i * cols;
    T* y = out.data() + i * cols;
    T mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    T sum{0};
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= sum;
  }
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, rows, cols]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      const std::vector<T>& y = ov.values();
      for (std::size_t i = 0; i < rows; ++i) {
        T dot{0};
        for (std::size_t j = 0; j < cols; ++j) dot += go[i * cols + j] * y[i * cols + j];
        for (std::size_t j = 0; j < cols; ++j)
          ga[i * cols + j] += y[i * cols + j] * (go[i * cols + j] - dot);
      }
    });
  }
  return out;
}

// LayerNorm over the last axis with learnable affine parameters.
template <typename T>
Tensor<T> layer_norm(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, T eps = T{1e-5}) {
  const auto [rows, cols] = detail::rows_cols(x.shape());
  require(gamma.rank() == 1 && gamma.size(0) == cols, "layer_norm: gamma width mismatch");
  require(beta.rank() == 1 && beta.size(0) == cols, "layer_norm: beta width mismatch");
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  Tensor<T> xhat = Tensor<T>::zeros(x.shape());
  std::vector<T> inv_std(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xi = x.data() + i * cols;
    T mean{0};
    for (std::size_t j = 0; j < cols; ++j) mean += xi[j];
    mean /= static_cast<T>(cols);
    T var{0};
    for (std::size_t j = 0; j < cols; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<T>(cols);
    const T istd = T{1} / std::sqrt(var + eps);
    inv_std[i] = istd;
    T* xh = xhat.data() + i * cols;
    T* y = out.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      xh[j] = (xi[j] - mean) * istd;
      y[j] = gamma.data()[j] * xh[j] + beta.data()[j];
    }
  }
  const bool tracked =
      tape != nullptr &&
      (x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
  if (tracked) {
    out.set_requires_grad();
    Tensor<T> xv = x, gv = gamma, bv = beta, ov = out, xh = xhat;
    tape->record([xv, gv, bv, ov, xh, inv_std, rows, cols]() mutable {
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < rows; ++i) {
        const T* gi = go.data() + i * cols;
        const T* xhi = xh.data() + i * cols;
        if (gv.requires_grad()) {
          std::vector<T>& gg = gv.grad();
          for (std::size_t j = 0; j < cols; ++j) gg[j] += gi[j] * xhi[j];
        }
        if (bv.requires_grad()) {
          std::vector<T>& gb = bv.grad();
          for (std::size_t j = 0; j < cols; ++j) gb[j] += gi[j];
        }
        if (xv.requires_grad()) {
          // dx = istd * (dxh - mean(dxh) - xh * mean(dxh * xh))
          T m1{0}, m2{0};
          for (std::size_t j = 0; j < cols; ++j) {
            const T dxh = gi[j] * gv.data()[j];
            m1 += dxh;
            m2 += dxh * xhi[j];
          }
          m1 /= static_cast<T>(cols);
          m2 /= static_cast<T>(cols);
          std::vector<T>& gx = xv.grad();
          for (std::size_t j = 0; j < cols; ++j) {
            const T dxh = gi[j] * gv.data()[j];
            gx[i * cols + j] += inv_std[i] * (dxh - m1 - xhi[j] * m2);
          }
        }
      }
    });
  }
  return out;
}

// Exact GELU: x * Phi(x) with the Gaussian CDF, not the tanh approximation.
template <typename T>
Tensor<T> gelu(Tape<T>* tape, const Tensor<T>& a) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double x = static_cast<double>(a.data()[i]);
    out.data()[i] = static_cast<T>(x * 0.5 * (1.0 + std::erf(x * kInvSqrt2)));
  }
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        const double x = static_cast<double>(av.data()[i]);
        const double phi = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        ga[i] += go[i] * static_cast<T>(phi + x * pdf);
      }
    });
  }
  return out;
}

// Inverted dropout. keep_prob 1 returns the input unchanged (exact identity,
// identity backward). The mask comes from the supplied stream so a fixed seed
// replays exactly.
template <typename T>
Tensor<T> dropout(Tape<T>* tape, const Tensor<T>& a, double keep_prob, Rng& rng) {
  require(keep_prob > 0.0 && keep_prob <= 1.0, "dropout: keep probability in (0, 1]");
  if (keep_prob == 1.0) return a;
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  std::vector<T> mask(a.numel());
  const T inv = static_cast<T>(1.0 / keep_prob);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    mask[i] = rng.uniform() < keep_prob ? inv : T{0};
    out.data()[i] = a.data()[i] * mask[i];
  }
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, mask = std::move(mask)]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * mask[i];
    });
  }
  return out;
}

// Column means over the leading axis: [N x d] -> [d].
template <typename T>
Tensor<T> mean_rows(Tape<T>* tape, const Tensor<T>& a) {
  require(a.rank() == 2 && a.size(0) > 0, "mean_rows expects a non-empty rank-2 tensor");
  const std::size_t rows = a.size(0), cols = a.size(1);
  Tensor<T> out = Tensor<T>::zeros({cols});
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out.data()[j] += a.data()[i * cols + j];
  const T inv = T{1} / static_cast<T>(rows);
  for (std::size_t j = 0; j < cols; ++j) out.data()[j] *= inv;
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov, rows, cols, inv]() mutable {
      std::vector<T>& ga = av.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) ga[i * cols + j] += go[j] * inv;
    });
  }
  return out;
}

template <typename T>
Tensor<T> sum_all(Tape<T>* tape, const Tensor<T>& a) {
  T s{0};
  for (std::size_t i = 0; i < a.numel(); ++i) s += a.data()[i];
  Tensor<T> out = Tensor<T>::scalar(s);
  if (detail::track(tape, a)) {
    out.set_requires_grad();
    Tensor<T> av = a, ov = out;
    tape->record([av, ov]() mutable {
      std::vector<T>& ga = av.grad();
      const T g = ov.grad()[0];
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

// Fixed sparse row combination: out = S * x with S in CSR form. S is a
// constant (index tables, interpolation weights); only x is differentiated,
// via the precomputed transpose.
struct SparseMix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::uint32_t> offsets;  // rows+1
  std::vector<std::uint32_t> index;
  std::vector<double> weight;

  std::vector<std::uint32_t> t_offsets;  // transpose, cols+1
  std::vector<std::uint32_t> t_index;
  std::vector<double> t_weight;

  void finalize() {
    t_offsets.assign(cols + 1, 0);
    for (std::uint32_t c : index) ++t_offsets[c + 1];
    for (std::size_t c = 0; c < cols; ++c) t_offsets[c + 1] += t_offsets[c];
    t_index.resize(index.size());
    t_weight.resize(index.size());
    std::vector<std::uint32_t> fill(cols, 0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::uint32_t e = offsets[r]; e < offsets[r + 1]; ++e) {
        const std::uint32_t c = index[e];
        const std::uint32_t slot = t_offsets[c] + fill[c]++;
        t_index[slot] = static_cast<std::uint32_t>(r);
        t_weight[slot] = weight[e];
      }
  }
};

template <typename T>
Tensor<T> sparse_row_mix(Tape<T>* tape, std::shared_ptr<const SparseMix> s,
                         const Tensor<T>& x) {
  require(s != nullptr, "sparse_row_mix: null matrix");
  require(x.rank() == 2 && x.size(0) == s->cols, "sparse_row_mix: shape mismatch");
  const std::size_t d = x.size(1);
  Tensor<T> out = Tensor<T>::zeros({s->rows, d});
  for (std::size_t r = 0; r < s->rows; ++r) {
    T* dst = out.data() + r * d;
    for (std::uint32_t e = s->offsets[r]; e < s->offsets[r + 1]; ++e) {
      const T w = static_cast<T>(s->weight[e]);
      const T* src = x.data() + std::size_t{s->index[e]} * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += w * src[j];
    }
  }
  if (detail::track(tape, x)) {
    out.set_requires_grad();
    Tensor<T> xv = x, ov = out;
    tape->record([xv, ov, s, d]() mutable {
      std::vector<T>& gx = xv.grad();
      const std::vector<T>& go = ov.grad();
      for (std::size_t c = 0; c < s->cols; ++c) {
        T* dst = gx.data() + c * d;
        for (std::uint32_t e = s->t_offsets[c]; e < s->t_offsets[c + 1]; ++e) {
          const T w = static_cast<T>(s->t_weight[e]);
          const T* src = go.data() + std::size_t{s->t_index[e]} * d;
          for (std::size_t j = 0; j < d; ++j) dst[j] += w * src[j];
        }
      }
    });
  }
  return out;
}

// embedding_add: positional table added to every matching token matrix.
template <typename T>
Tensor<T> embedding_add(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& table) {
  return add(tape, x, table);
}

}  // namespace mssit
