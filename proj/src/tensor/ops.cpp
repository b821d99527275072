// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "s2f/simd/kernels.hpp"

namespace s2f::ops {
namespace {

template <typename T>
bool tracks(Tape<T>* tape, std::initializer_list<const Tensor<T>*> inputs) {
  if (!tape) return false;
  for (const Tensor<T>* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T>
void expect_rank(const Tensor<T>& x, std::size_t rank, const char* op) {
  if (x.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " + shape_str(x.shape()));
}

template <typename T>
void finish(const Tensor<T>& out, const char* op) {
  detail::check_finite<T>(out.data(), op);
}

// Columns per im2col chunk; bounds scratch memory for large images.
constexpr std::size_t kConvChunk = 4096;

struct ConvGeom {
  std::size_t b, c, h, w, o, k, ho, wo;
  int stride, pad;
};

template <typename T>
void im2col(const T* x, const ConvGeom& g, std::size_t p0, std::size_t len,
            T* cols) {
  const std::size_t kk = g.k * g.k;
  for (std::size_t c = 0; c < g.c; ++c) {
    const T* xc = x + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        T* row = cols + (c * kk + ky * g.k + kx) * len;
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t p = p0 + i;
          const long iy = static_cast<long>((p / g.wo) * g.stride + ky) - g.pad;
          const long ix = static_cast<long>((p % g.wo) * g.stride + kx) - g.pad;
          row[i] = (iy >= 0 && ix >= 0 && iy < static_cast<long>(g.h) &&
                    ix < static_cast<long>(g.w))
                       ? xc[iy * g.w + ix]
                       : T(0);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeom& g, std::size_t p0,
                std::size_t len, T* dx) {
  const std::size_t kk = g.k * g.k;
  for (std::size_t c = 0; c < g.c; ++c) {
    T* dxc = dx + c * g.h * g.w;
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const T* row = cols + (c * kk + ky * g.k + kx) * len;
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t p = p0 + i;
          const long iy = static_cast<long>((p / g.wo) * g.stride + ky) - g.pad;
          const long ix = static_cast<long>((p % g.wo) * g.stride + kx) - g.pad;
          if (iy >= 0 && ix >= 0 && iy < static_cast<long>(g.h) &&
              ix < static_cast<long>(g.w))
            dxc[iy * g.w + ix] += row[i];
        }
      }
    }
  }
}

template <typename T>
void transpose(const T* src, std::size_t rows, std::size_t cols, std::size_t ld,
               T* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * ld + c];
}

}  // namespace

template <typename T>
T sigmoid_scalar(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

// ---------------------------------------------------------------- conv2d

template <typename T>
Tensor<T> conv2d(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w,
                 int stride, int padding) {
  expect_rank(x, 4, "conv2d input");
  expect_rank(w, 4, "conv2d kernel");
  if (w.dim(1) != x.dim(1))
    throw DimensionError("conv2d: kernel expects " + std::to_string(w.dim(1)) +
                         " input channels, input has " +
                         std::to_string(x.dim(1)));
  if (w.dim(2) != w.dim(3) || w.dim(2) % 2 == 0)
    throw DimensionError("conv2d: kernel must be square and odd, got " +
                         shape_str(w.shape()));
  if (stride < 1 || padding < 0)
    throw DimensionError("conv2d: invalid stride/padding");
  ConvGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), 0, 0,
             stride,   padding};
  const long hp = static_cast<long>(g.h) + 2 * padding - static_cast<long>(g.k);
  const long wp = static_cast<long>(g.w) + 2 * padding - static_cast<long>(g.k);
  if (hp < 0 || wp < 0)
    throw DimensionError("conv2d: kernel larger than padded input " +
                         shape_str(x.shape()));
  g.ho = static_cast<std::size_t>(hp / stride + 1);
  g.wo = static_cast<std::size_t>(wp / stride + 1);

  const auto& kern = simd::kernels<T>();
  const std::size_t kdim = g.c * g.k * g.k;
  const std::size_t plane = g.ho * g.wo;
  Tensor<T> out = Tensor<T>::zeros({g.b, g.o, g.ho, g.wo});
  std::vector<T> cols(kdim * std::min(plane, kConvChunk));
  for (std::size_t b = 0; b < g.b; ++b) {
    const T* xb = x.ptr() + b * g.c * g.h * g.w;
    T* ob = out.ptr() + b * g.o * plane;
    for (std::size_t p0 = 0; p0 < plane; p0 += kConvChunk) {
      const std::size_t len = std::min(kConvChunk, plane - p0);
      im2col(xb, g, p0, len, cols.data());
      kern.gemm_nn(g.o, len, kdim, w.ptr(), kdim, cols.data(), len, ob + p0,
                   plane);
    }
  }
  finish(out, "conv2d");

  if (tracks(tape, {&x, &w})) {
    out.set_requires_grad(true);
    tape->record([x, w, out, g]() mutable {
      if (!out.has_grad()) return;
      const auto& kern = simd::kernels<T>();
      const std::size_t kdim = g.c * g.k * g.k;
      const std::size_t plane = g.ho * g.wo;
      const std::size_t chunk = std::min(plane, kConvChunk);
      std::vector<T> cols(kdim * chunk), cols_t(kdim * chunk), dcols;
      std::vector<T> w_t;
      if (x.requires_grad()) {
        w_t.resize(g.o * kdim);
        transpose(w.ptr(), g.o, kdim, kdim, w_t.data());
        dcols.resize(kdim * chunk);
      }
      std::span<const T> gout = out.grad();
      std::span<T> gw = w.requires_grad() ? w.grad() : std::span<T>{};
      std::span<T> gx = x.requires_grad() ? x.grad() : std::span<T>{};
      std::vector<T> gout_t;
      if (w.requires_grad()) gout_t.resize(g.o * chunk);
      for (std::size_t b = 0; b < g.b; ++b) {
        const T* xb = x.ptr() + b * g.c * g.h * g.w;
        const T* gob = gout.data() + b * g.o * plane;
        for (std::size_t p0 = 0; p0 < plane; p0 += kConvChunk) {
          const std::size_t len = std::min(kConvChunk, plane - p0);
          if (w.requires_grad()) {
            // dW[O,K] += dOut[O,len] * cols^T[len,K]
            im2col(xb, g, p0, len, cols.data());
            transpose(cols.data(), kdim, len, len, cols_t.data());
            kern.gemm_nn(g.o, kdim, len, gob + p0, plane, cols_t.data(), kdim,
                         gw.data(), kdim);
          }
          if (x.requires_grad()) {
            // dCols[K,len] = W^T[K,O] * dOut[O,len]
            std::fill(dcols.begin(), dcols.begin() + kdim * len, T(0));
            kern.gemm_nn(kdim, len, g.o, w_t.data(), g.o, gob + p0, plane,
                         dcols.data(), len);
            col2im_add(dcols.data(), g, p0, len,
                       gx.data() + b * g.c * g.h * g.w);
          }
        }
      }
    });
  }
  return out;
}

// ------------------------------------------------------------- batchnorm

template <typename T>
BatchNorm2d<T> BatchNorm2d<T>::make(std::size_t channels) {
  BatchNorm2d bn;
  bn.gamma = Tensor<T>::full({channels}, T(1), true);
  bn.beta = Tensor<T>::zeros({channels}, true);
  bn.running_mean = Tensor<T>::zeros({channels});
  bn.running_var = Tensor<T>::full({channels}, T(1));
  return bn;
}

template <typename T>
Tensor<T> batchnorm2d(Tape<T>* tape, const Tensor<T>& x, BatchNorm2d<T>& bn,
                      bool training) {
  expect_rank(x, 4, "batchnorm2d");
  const std::size_t nb = x.dim(0), nc = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (nc != bn.channels())
    throw DimensionError("batchnorm2d: input has " + std::to_string(nc) +
                         " channels, stats have " +
                         std::to_string(bn.channels()));
  const std::size_t count = nb * hw;
  if (training && count == 0)
    throw DimensionError("batchnorm2d: empty batch in training mode");

  std::vector<T> mean(nc), inv_std(nc);
  if (training) {
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0;
      for (std::size_t b = 0; b < nb; ++b) {
        const T* p = x.ptr() + (b * nc + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) s += p[i];
      }
      const double m = s / static_cast<double>(count);
      double v = 0;
      for (std::size_t b = 0; b < nb; ++b) {
        const T* p = x.ptr() + (b * nc + c) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          const double d = p[i] - m;
          v += d * d;
        }
      }
      const double var = v / static_cast<double>(count);
      mean[c] = static_cast<T>(m);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + bn.eps));
      const double unbiased =
          count > 1 ? var * count / static_cast<double>(count - 1) : var;
      bn.running_mean[c] = static_cast<T>((1 - bn.momentum) * bn.running_mean[c] +
                                          bn.momentum * m);
      bn.running_var[c] = static_cast<T>((1 - bn.momentum) * bn.running_var[c] +
                                         bn.momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < nc; ++c) {
      mean[c] = bn.running_mean[c];
      inv_std[c] = T(1) / std::sqrt(bn.running_var[c] + bn.eps);
    }
  }

  Tensor<T> out = Tensor<T>::zeros(x.shape());
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t c = 0; c < nc; ++c) {
      const T* p = x.ptr() + (b * nc + c) * hw;
      T* q = out.ptr() + (b * nc + c) * hw;
      const T a = bn.gamma[c] * inv_std[c];
      const T sh = bn.beta[c] - mean[c] * a;
      for (std::size_t i = 0; i < hw; ++i) q[i] = p[i] * a + sh;
    }
  }
  finish(out, "batchnorm2d");

  if (tracks(tape, {&x, &bn.gamma, &bn.beta})) {
    out.set_requires_grad(true);
    tape->record([x, out, gamma = bn.gamma, beta = bn.beta, mean, inv_std,
                  training, nb, nc, hw, count]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> gy = out.grad();
      for (std::size_t c = 0; c < nc; ++c) {
        double sum_gy = 0, sum_gy_xhat = 0;
        for (std::size_t b = 0; b < nb; ++b) {
          const T* p = x.ptr() + (b * nc + c) * hw;
          const T* g = gy.data() + (b * nc + c) * hw;
          for (std::size_t i = 0; i < hw; ++i) {
            sum_gy += g[i];
            sum_gy_xhat += g[i] * (p[i] - mean[c]) * inv_std[c];
          }
        }
        if (gamma.requires_grad()) gamma.grad()[c] += static_cast<T>(sum_gy_xhat);
        if (beta.requires_grad()) beta.grad()[c] += static_cast<T>(sum_gy);
        if (!x.requires_grad()) continue;
        std::span<T> gx = x.grad();
        const T gscale = gamma[c] * inv_std[c];
        const T n = static_cast<T>(count);
        const T mg = static_cast<T>(sum_gy) / n;
        const T mgx = static_cast<T>(sum_gy_xhat) / n;
        for (std::size_t b = 0; b < nb; ++b) {
          const T* p = x.ptr() + (b * nc + c) * hw;
          const T* g = gy.data() + (b * nc + c) * hw;
          T* d = gx.data() + (b * nc + c) * hw;
          if (training) {
            for (std::size_t i = 0; i < hw; ++i) {
              const T xhat = (p[i] - mean[c]) * inv_std[c];
              d[i] += gscale * (g[i] - mg - xhat * mgx);
            }
          } else {
            for (std::size_t i = 0; i < hw; ++i) d[i] += gscale * g[i];
          }
        }
      }
    });
  }
  return out;
}

// ----------------------------------------------------------- activations

namespace {
thread_local ReluTrace* t_relu_trace = nullptr;
}  // namespace

void set_relu_trace(ReluTrace* trace) { t_relu_trace = trace; }

template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  ReluTrace* trace = t_relu_trace;
  if (trace && trace->pinned) {
    const std::vector<std::uint8_t>& pin = *trace->pinned;
    if (trace->cursor + x.numel() > pin.size())
      throw std::logic_error("relu: pinned sign pattern exhausted");
    for (std::size_t i = 0; i < x.numel(); ++i) out[i] = pin[trace->cursor + i] ? x[i] : T(0);
    trace->cursor += x.numel();
  } else {
    simd::kernels<T>().relu(x.ptr(), out.ptr(), x.numel());
    if (trace)
      for (const T v : x.data()) trace->signs.push_back(v > T(0));
  }
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      simd::kernels<T>().relu_backward(x.ptr(), out.grad().data(),
                                       x.grad().data(), x.numel());
    });
  }
  return out;
}

template <typename T>
Tensor<T> sigmoid(Tape<T>* tape, const Tensor<T>& x) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = sigmoid_scalar(x[i]);
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      std::span<T> gx = x.grad();
      std::span<const T> gy = out.grad();
      for (std::size_t i = 0; i < gx.size(); ++i)
        gx[i] += gy[i] * out[i] * (T(1) - out[i]);
    });
  }
  return out;
}

// --------------------------------------------------------------- pooling

template <typename T>
Tensor<T> avgpool2d(Tape<T>* tape, const Tensor<T>& x, int k, int stride) {
  expect_rank(x, 4, "avgpool2d");
  const std::size_t nb = x.dim(0), nc = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t uk = static_cast<std::size_t>(k);
  const std::size_t us = static_cast<std::size_t>(stride);
  if (k < 1 || stride < 1 || h < uk || w < uk)
    throw DimensionError("avgpool2d: input " + shape_str(x.shape()) +
                         " smaller than window " + std::to_string(k));
  const std::size_t ho = (h - uk) / us + 1, wo = (w - uk) / us + 1;
  const T inv = T(1) / static_cast<T>(uk * uk);
  Tensor<T> out = Tensor<T>::zeros({nb, nc, ho, wo});
  for (std::size_t bc = 0; bc < nb * nc; ++bc) {
    const T* p = x.ptr() + bc * h * w;
    T* q = out.ptr() + bc * ho * wo;
    for (std::size_t oy = 0; oy < ho; ++oy)
      for (std::size_t ox = 0; ox < wo; ++ox) {
        T s = 0;
        for (std::size_t ky = 0; ky < uk; ++ky)
          for (std::size_t kx = 0; kx < uk; ++kx)
            s += p[(oy * us + ky) * w + ox * us + kx];
        q[oy * wo + ox] = s * inv;
      }
  }
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, nb, nc, h, w, ho, wo, uk, us, inv]() mutable {
      if (!out.has_grad()) return;
      std::span<T> gx = x.grad();
      std::span<const T> gy = out.grad();
      for (std::size_t bc = 0; bc < nb * nc; ++bc)
        for (std::size_t oy = 0; oy < ho; ++oy)
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const T g = gy[bc * ho * wo + oy * wo + ox] * inv;
            for (std::size_t ky = 0; ky < uk; ++ky)
              for (std::size_t kx = 0; kx < uk; ++kx)
                gx[bc * h * w + (oy * us + ky) * w + ox * us + kx] += g;
          }
    });
  }
  return out;
}

template <typename T>
Tensor<T> adaptive_avgpool(Tape<T>* tape, const Tensor<T>& x) {
  expect_rank(x, 4, "adaptive_avgpool");
  const std::size_t nb = x.dim(0), nc = x.dim(1), hw = x.dim(2) * x.dim(3);
  Tensor<T> out = Tensor<T>::zeros({nb, nc, 1, 1});
  for (std::size_t bc = 0; bc < nb * nc; ++bc) {
    const T* p = x.ptr() + bc * hw;
    T s = 0;
    for (std::size_t i = 0; i < hw; ++i) s += p[i];
    out[bc] = s / static_cast<T>(hw);
  }
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, nb, nc, hw]() mutable {
      if (!out.has_grad()) return;
      std::span<T> gx = x.grad();
      std::span<const T> gy = out.grad();
      for (std::size_t bc = 0; bc < nb * nc; ++bc) {
        const T g = gy[bc] / static_cast<T>(hw);
        for (std::size_t i = 0; i < hw; ++i) gx[bc * hw + i] += g;
      }
    });
  }
  return out;
}

// --------------------------------------------------------------- shaping

template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& x, Shape shape) {
  Tensor<T> out = x.reshaped(std::move(shape));
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      simd::kernels<T>().axpy(T(1), out.grad().data(), x.grad().data(),
                              x.numel());
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(Tape<T>* tape, const Tensor<T>& a,
                          const Tensor<T>& b) {
  expect_rank(a, 4, "concat_channels");
  expect_rank(b, 4, "concat_channels");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw DimensionError("concat_channels: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  const std::size_t nb = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const std::size_t hw = a.dim(2) * a.dim(3);
  Tensor<T> out = Tensor<T>::zeros({nb, ca + cb, a.dim(2), a.dim(3)});
  for (std::size_t n = 0; n < nb; ++n) {
    std::copy_n(a.ptr() + n * ca * hw, ca * hw, out.ptr() + n * (ca + cb) * hw);
    std::copy_n(b.ptr() + n * cb * hw, cb * hw,
                out.ptr() + n * (ca + cb) * hw + ca * hw);
  }
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape->record([a, b, out, nb, ca, cb, hw]() mutable {
      if (!out.has_grad()) return;
      const auto& kern = simd::kernels<T>();
      std::span<const T> gy = out.grad();
      for (std::size_t n = 0; n < nb; ++n) {
        const T* src = gy.data() + n * (ca + cb) * hw;
        if (a.requires_grad())
          kern.axpy(T(1), src, a.grad().data() + n * ca * hw, ca * hw);
        if (b.requires_grad())
          kern.axpy(T(1), src + ca * hw, b.grad().data() + n * cb * hw, cb * hw);
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_batch(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != b.rank() || a.rank() == 0 ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1))
    throw DimensionError("concat_batch: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  Shape s = a.shape();
  s[0] += b.dim(0);
  Tensor<T> out = Tensor<T>::zeros(s);
  std::copy_n(a.ptr(), a.numel(), out.ptr());
  std::copy_n(b.ptr(), b.numel(), out.ptr() + a.numel());
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      const auto& kern = simd::kernels<T>();
      std::span<const T> gy = out.grad();
      if (a.requires_grad()) kern.axpy(T(1), gy.data(), a.grad().data(), a.numel());
      if (b.requires_grad())
        kern.axpy(T(1), gy.data() + a.numel(), b.grad().data(), b.numel());
    });
  }
  return out;
}

template <typename T>
Tensor<T> slice_batch(Tape<T>* tape, const Tensor<T>& x, std::size_t begin,
                      std::size_t end) {
  if (x.rank() == 0 || begin > end || end > x.dim(0))
    throw DimensionError("slice_batch: [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") of " + shape_str(x.shape()));
  Shape s = x.shape();
  s[0] = end - begin;
  const std::size_t row = x.numel() / x.dim(0);
  Tensor<T> out = Tensor<T>::zeros(s);
  std::copy_n(x.ptr() + begin * row, (end - begin) * row, out.ptr());
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, begin, row]() mutable {
      if (!out.has_grad()) return;
      simd::kernels<T>().axpy(T(1), out.grad().data(),
                              x.grad().data() + begin * row, out.numel());
    });
  }
  return out;
}

// ------------------------------------------------------------ arithmetic

template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& x) {
  double s = 0;
  for (const T v : x.data()) s += v;
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(s));
  finish(out, "sum");
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out]() mutable {
      if (!out.has_grad()) return;
      const T g = out.grad()[0];
      for (T& v : x.grad()) v += g;
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape())
    throw DimensionError("mul: " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  finish(out, "mul");
  if (tracks(tape, {&a, &b})) {
    out.set_requires_grad(true);
    tape->record([a, b, out]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> gy = out.grad();
      if (a.requires_grad()) {
        std::span<T> ga = a.grad();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i] * b[i];
      }
      if (b.requires_grad()) {
        std::span<T> gb = b.grad();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gy[i] * a[i];
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tape<T>* tape, const Tensor<T>& x, T factor) {
  Tensor<T> out = x.clone();
  simd::kernels<T>().scale(factor, out.ptr(), out.numel());
  finish(out, "scale");
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, factor]() mutable {
      if (!out.has_grad()) return;
      simd::kernels<T>().axpy(factor, out.grad().data(), x.grad().data(),
                              x.numel());
    });
  }
  return out;
}

template <typename T>
Tensor<T> mul_rowwise(Tape<T>* tape, const Tensor<T>& w, const Tensor<T>& e) {
  expect_rank(e, 2, "mul_rowwise");
  if (w.numel() != e.dim(1))
    throw DimensionError("mul_rowwise: weights " + shape_str(w.shape()) +
                         " vs energies " + shape_str(e.shape()));
  const std::size_t nb = e.dim(0), ng = e.dim(1);
  Tensor<T> out = Tensor<T>::zeros(e.shape());
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t g = 0; g < ng; ++g) out[b * ng + g] = w[g] * e[b * ng + g];
  finish(out, "mul_rowwise");
  if (tracks(tape, {&w, &e})) {
    out.set_requires_grad(true);
    tape->record([w, e, out, nb, ng]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> gy = out.grad();
      for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t g = 0; g < ng; ++g) {
          if (w.requires_grad()) w.grad()[g] += gy[b * ng + g] * e[b * ng + g];
          if (e.requires_grad()) e.grad()[b * ng + g] += gy[b * ng + g] * w[g];
        }
    });
  }
  return out;
}

template <typename T>
Tensor<T> scale_channel_groups(Tape<T>* tape, const Tensor<T>& x,
                               const Tensor<T>& gain) {
  expect_rank(x, 4, "scale_channel_groups");
  expect_rank(gain, 2, "scale_channel_groups gain");
  const std::size_t nb = x.dim(0), nc = x.dim(1), hw = x.dim(2) * x.dim(3);
  const std::size_t ng = gain.dim(1);
  if (gain.dim(0) != nb || ng == 0 || nc % ng != 0)
    throw DimensionError("scale_channel_groups: features " +
                         shape_str(x.shape()) + " vs gains " +
                         shape_str(gain.shape()));
  const std::size_t per = nc / ng;
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t c = 0; c < nc; ++c) {
      const T gv = gain[b * ng + c / per];
      const T* p = x.ptr() + (b * nc + c) * hw;
      T* q = out.ptr() + (b * nc + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) q[i] = p[i] * gv;
    }
  finish(out, "scale_channel_groups");
  if (tracks(tape, {&x, &gain})) {
    out.set_requires_grad(true);
    tape->record([x, gain, out, nb, nc, hw, ng, per]() mutable {
      if (!out.has_grad()) return;
      const auto& kern = simd::kernels<T>();
      std::span<const T> gy = out.grad();
      for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t c = 0; c < nc; ++c) {
          const std::size_t off = (b * nc + c) * hw;
          if (x.requires_grad())
            kern.axpy(gain[b * ng + c / per], gy.data() + off,
                      x.grad().data() + off, hw);
          if (gain.requires_grad())
            gain.grad()[b * ng + c / per] +=
                kern.dot(gy.data() + off, x.ptr() + off, hw);
        }
    });
  }
  return out;
}

// ----------------------------------------------------------------- dense

template <typename T>
Tensor<T> linear(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w,
                 const Tensor<T>& b) {
  expect_rank(x, 2, "linear input");
  expect_rank(w, 2, "linear weight");
  const std::size_t nb = x.dim(0), d = x.dim(1), o = w.dim(1);
  if (w.dim(0) != d || b.numel() != o)
    throw DimensionError("linear: input " + shape_str(x.shape()) +
                         ", weight " + shape_str(w.shape()) + ", bias " +
                         shape_str(b.shape()));
  Tensor<T> out = Tensor<T>::zeros({nb, o});
  for (std::size_t n = 0; n < nb; ++n) std::copy_n(b.ptr(), o, out.ptr() + n * o);
  simd::kernels<T>().gemm_nn(nb, o, d, x.ptr(), d, w.ptr(), o, out.ptr(), o);
  finish(out, "linear");
  if (tracks(tape, {&x, &w, &b})) {
    out.set_requires_grad(true);
    tape->record([x, w, b, out, nb, d, o]() mutable {
      if (!out.has_grad()) return;
      const auto& kern = simd::kernels<T>();
      std::span<const T> gy = out.grad();
      if (x.requires_grad()) {
        std::vector<T> wt(o * d);
        transpose(w.ptr(), d, o, o, wt.data());
        kern.gemm_nn(nb, d, o, gy.data(), o, wt.data(), d, x.grad().data(), d);
      }
      if (w.requires_grad()) {
        std::vector<T> xt(d * nb);
        transpose(x.ptr(), nb, d, d, xt.data());
        kern.gemm_nn(d, o, nb, xt.data(), nb, gy.data(), o, w.grad().data(), o);
      }
      if (b.requires_grad()) {
        std::span<T> gb = b.grad();
        for (std::size_t n = 0; n < nb; ++n)
          for (std::size_t j = 0; j < o; ++j) gb[j] += gy[n * o + j];
      }
    });
  }
  return out;
}

// ------------------------------------------------------------------ loss

template <typename T>
Tensor<T> bce_with_logits(Tape<T>* tape, const Tensor<T>& logits,
                          std::span<const std::uint8_t> labels) {
  if (logits.numel() != labels.size() || labels.empty())
    throw DimensionError("bce_with_logits: " + std::to_string(logits.numel()) +
                         " logits vs " + std::to_string(labels.size()) +
                         " labels");
  const std::size_t n = labels.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 1)
      throw std::invalid_argument("bce_with_logits: labels must be 0 or 1");
    const double z = logits[i];
    total += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor<T> out = Tensor<T>::full({1}, static_cast<T>(total / n));
  finish(out, "bce_with_logits");
  if (tracks(tape, {&logits})) {
    out.set_requires_grad(true);
    std::vector<std::uint8_t> lab(labels.begin(), labels.end());
    tape->record([logits, out, lab = std::move(lab), n]() mutable {
      if (!out.has_grad()) return;
      const T g = out.grad()[0] / static_cast<T>(n);
      std::span<T> gz = logits.grad();
      for (std::size_t i = 0; i < n; ++i)
        gz[i] += g * (sigmoid_scalar(logits[i]) - static_cast<T>(lab[i]));
    });
  }
  return out;
}

template <typename T>
Tensor<T> group_sum(Tape<T>* tape, const Tensor<T>& x, std::size_t groups,
                    T divisor) {
  expect_rank(x, 4, "group_sum");
  const std::size_t nb = x.dim(0), nc = x.dim(1), hw = x.dim(2) * x.dim(3);
  if (groups == 0 || nc % groups != 0)
    throw DimensionError("group_sum: " + std::to_string(nc) +
                         " channels not divisible into " +
                         std::to_string(groups) + " groups");
  const std::size_t span_len = nc / groups * hw;
  const T inv = T(1) / divisor;
  Tensor<T> out = Tensor<T>::zeros({nb, groups});
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t g = 0; g < groups; ++g) {
      const T* p = x.ptr() + (b * groups + g) * span_len;
      T acc = 0;
      for (std::size_t i = 0; i < span_len; ++i) acc += p[i];
      out[b * groups + g] = acc * inv;
    }
  finish(out, "group_sum");
  if (tracks(tape, {&x})) {
    out.set_requires_grad(true);
    tape->record([x, out, nb, groups, span_len, inv]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> gy = out.grad();
      std::span<T> gx = x.grad();
      for (std::size_t bg = 0; bg < nb * groups; ++bg) {
        const T v = gy[bg] * inv;
        T* q = gx.data() + bg * span_len;
        for (std::size_t i = 0; i < span_len; ++i) q[i] += v;
      }
    });
  }
  return out;
}

#define S2F_INSTANTIATE_OPS(T)                                                 \
  template T sigmoid_scalar<T>(T);                                             \
  template Tensor<T> conv2d<T>(Tape<T>*, const Tensor<T>&, const Tensor<T>&,  \
                               int, int);                                      \
  template struct BatchNorm2d<T>;                                              \
  template Tensor<T> batchnorm2d<T>(Tape<T>*, const Tensor<T>&,                \
                                    BatchNorm2d<T>&, bool);                    \
  template Tensor<T> relu<T>(Tape<T>*, const Tensor<T>&);                      \
  template Tensor<T> sigmoid<T>(Tape<T>*, const Tensor<T>&);                   \
  template Tensor<T> avgpool2d<T>(Tape<T>*, const Tensor<T>&, int, int);       \
  template Tensor<T> adaptive_avgpool<T>(Tape<T>*, const Tensor<T>&);          \
  template Tensor<T> reshape<T>(Tape<T>*, const Tensor<T>&, Shape);            \
  template Tensor<T> linear<T>(Tape<T>*, const Tensor<T>&, const Tensor<T>&,  \
                               const Tensor<T>&);                              \
  template Tensor<T> concat_channels<T>(Tape<T>*, const Tensor<T>&,            \
                                        const Tensor<T>&);                     \
  template Tensor<T> concat_batch<T>(Tape<T>*, const Tensor<T>&,               \
                                     const Tensor<T>&);                        \
  template Tensor<T> slice_batch<T>(Tape<T>*, const Tensor<T>&, std::size_t,   \
                                    std::size_t);                              \
  template Tensor<T> sum<T>(Tape<T>*, const Tensor<T>&);                       \
  template Tensor<T> mul<T>(Tape<T>*, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> scale<T>(Tape<T>*, const Tensor<T>&, T);                  \
  template Tensor<T> mul_rowwise<T>(Tape<T>*, const Tensor<T>&,                \
                                    const Tensor<T>&);                         \
  template Tensor<T> scale_channel_groups<T>(Tape<T>*, const Tensor<T>&,       \
                                             const Tensor<T>&);                \
  template Tensor<T> bce_with_logits<T>(Tape<T>*, const Tensor<T>&,            \
                                        std::span<const std::uint8_t>);        \
  template Tensor<T> group_sum<T>(Tape<T>*, const Tensor<T>&, std::size_t, T);

S2F_INSTANTIATE_OPS(float)
S2F_INSTANTIATE_OPS(double)

}  // namespace s2f::ops
