// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/tensor/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "s2f/simd/kernels.hpp"

namespace s2f::fft {
namespace {

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// exp(-2*pi*i*k/n) for k in [0, n), evaluated in long double.
template <typename T>
const std::vector<T>& twiddles(std::size_t n, bool imag_part) {
  thread_local std::unordered_map<std::size_t, std::pair<std::vector<T>, std::vector<T>>>
      cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<T> c(n), s(n);
    for (std::size_t k = 0; k < n; ++k) {
      const long double a =
          -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) /
          static_cast<long double>(n);
      c[k] = static_cast<T>(std::cos(a));
      s[k] = static_cast<T>(std::sin(a));
    }
    it = cache.emplace(n, std::make_pair(std::move(c), std::move(s))).first;
  }
  return imag_part ? it->second.second : it->second.first;
}

template <typename T>
void radix2(T* re, T* im, std::size_t n, bool inverse) {
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  const std::vector<T>& wc = twiddles<T>(n, false);
  const std::vector<T>& ws = twiddles<T>(n, true);
  const T sign = inverse ? T(-1) : T(1);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const T cr = wc[k * step];
        const T ci = sign * ws[k * step];
        const std::size_t a = i + k, b = i + k + half;
        const T tr = re[b] * cr - im[b] * ci;
        const T ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }
}

template <typename T>
void naive(T* re, T* im, std::size_t n, bool inverse) {
  const std::vector<T>& wc = twiddles<T>(n, false);
  const std::vector<T>& ws = twiddles<T>(n, true);
  const T sign = inverse ? T(-1) : T(1);
  std::vector<T> outr(n, T(0)), outi(n, T(0));
  for (std::size_t k = 0; k < n; ++k) {
    T sr = 0, si = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t idx = (k * t) % n;
      const T cr = wc[idx], ci = sign * ws[idx];
      sr += re[t] * cr - im[t] * ci;
      si += re[t] * ci + im[t] * cr;
    }
    outr[k] = sr;
    outi[k] = si;
  }
  std::copy(outr.begin(), outr.end(), re);
  std::copy(outi.begin(), outi.end(), im);
}

template <typename T>
void planes_2d(T* re, T* im, std::size_t h, std::size_t w, bool inverse) {
  for (std::size_t y = 0; y < h; ++y) transform_1d(re + y * w, im + y * w, w, 1, inverse);
  for (std::size_t x = 0; x < w; ++x) transform_1d(re + x, im + x, h, w, inverse);
}

template <typename S>
void expect_2d(const S& shape, const char* op) {
  if (shape.size() < 2)
    throw DimensionError(std::string(op) + ": need at least 2 dims, got " +
                         shape_str(shape));
}

// out[(u + sh) % h][(v + sw) % w] = in[u][v] for every plane.
template <typename T>
void roll(std::span<const T> in, std::span<T> out, std::size_t planes,
          std::size_t h, std::size_t w, std::size_t sh, std::size_t sw,
          bool accumulate) {
  for (std::size_t p = 0; p < planes; ++p) {
    const T* src = in.data() + p * h * w;
    T* dst = out.data() + p * h * w;
    for (std::size_t u = 0; u < h; ++u) {
      const std::size_t du = (u + sh) % h;
      for (std::size_t v = 0; v < w; ++v) {
        const std::size_t dv = (v + sw) % w;
        if (accumulate)
          dst[du * w + dv] += src[u * w + v];
        else
          dst[du * w + dv] = src[u * w + v];
      }
    }
  }
}

}  // namespace

template <typename T>
void transform_1d(T* re, T* im, std::size_t n, std::size_t stride,
                  bool inverse) {
  if (n <= 1) return;
  if (stride == 1) {
    if (is_pow2(n))
      radix2(re, im, n, inverse);
    else
      naive(re, im, n, inverse);
    return;
  }
  std::vector<T> r(n), i(n);
  for (std::size_t k = 0; k < n; ++k) {
    r[k] = re[k * stride];
    i[k] = im[k * stride];
  }
  transform_1d(r.data(), i.data(), n, 1, inverse);
  for (std::size_t k = 0; k < n; ++k) {
    re[k * stride] = r[k];
    im[k * stride] = i[k];
  }
}

template <typename T>
ComplexTensor<T> fft2(Tape<T>* tape, const Tensor<T>& x) {
  expect_2d(x.shape(), "fft2");
  const std::size_t h = x.shape()[x.rank() - 2], w = x.shape()[x.rank() - 1];
  const std::size_t planes = x.numel() / (h * w);
  ComplexTensor<T> z = ComplexTensor<T>::zeros(x.shape());
  std::copy(x.data().begin(), x.data().end(), z.re().begin());
  for (std::size_t p = 0; p < planes; ++p)
    planes_2d(z.re().data() + p * h * w, z.im().data() + p * h * w, h, w, false);

  if (tape && x.requires_grad()) {
    z.set_requires_grad(true);
    tape->record([x, z, h, w, planes]() mutable {
      if (!z.has_grad()) return;
      std::vector<T> gr(z.grad_re().begin(), z.grad_re().end());
      std::vector<T> gi(z.grad_im().begin(), z.grad_im().end());
      std::span<T> gx = x.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        planes_2d(gr.data() + p * h * w, gi.data() + p * h * w, h, w, true);
      }
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gr[i];
    });
  }
  return z;
}

template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& in) {
  expect_2d(in.shape(), "fft2");
  const std::size_t rank = in.shape().size();
  const std::size_t h = in.shape()[rank - 2], w = in.shape()[rank - 1];
  ComplexTensor<T> z = ComplexTensor<T>::zeros(in.shape());
  std::copy(in.re().begin(), in.re().end(), z.re().begin());
  std::copy(in.im().begin(), in.im().end(), z.im().begin());
  for (std::size_t p = 0; p < z.numel() / (h * w); ++p)
    planes_2d(z.re().data() + p * h * w, z.im().data() + p * h * w, h, w, false);
  return z;
}

template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& in) {
  expect_2d(in.shape(), "ifft2");
  const std::size_t rank = in.shape().size();
  const std::size_t h = in.shape()[rank - 2], w = in.shape()[rank - 1];
  ComplexTensor<T> z = ComplexTensor<T>::zeros(in.shape());
  std::copy(in.re().begin(), in.re().end(), z.re().begin());
  std::copy(in.im().begin(), in.im().end(), z.im().begin());
  for (std::size_t p = 0; p < z.numel() / (h * w); ++p)
    planes_2d(z.re().data() + p * h * w, z.im().data() + p * h * w, h, w, true);
  const T inv = T(1) / static_cast<T>(h * w);
  for (T& v : z.re()) v *= inv;
  for (T& v : z.im()) v *= inv;
  return z;
}

template <typename T>
ComplexTensor<T> fftshift(Tape<T>* tape, const ComplexTensor<T>& z) {
  expect_2d(z.shape(), "fftshift");
  const std::size_t rank = z.shape().size();
  const std::size_t h = z.shape()[rank - 2], w = z.shape()[rank - 1];
  const std::size_t planes = z.numel() / (h * w);
  ComplexTensor<T> out = ComplexTensor<T>::zeros(z.shape());
  roll<T>(z.re(), out.re(), planes, h, w, h / 2, w / 2, false);
  roll<T>(z.im(), out.im(), planes, h, w, h / 2, w / 2, false);
  if (tape && z.requires_grad()) {
    out.set_requires_grad(true);
    tape->record([z, out, h, w, planes]() mutable {
      if (!out.has_grad()) return;
      // Inverse roll: shift by the complementary amount.
      roll<T>(out.grad_re(), z.grad_re(), planes, h, w, h - h / 2, w - w / 2, true);
      roll<T>(out.grad_im(), z.grad_im(), planes, h, w, h - h / 2, w - w / 2, true);
    });
  }
  return out;
}

template <typename T>
ComplexTensor<T> ifftshift(const ComplexTensor<T>& z) {
  expect_2d(z.shape(), "ifftshift");
  const std::size_t rank = z.shape().size();
  const std::size_t h = z.shape()[rank - 2], w = z.shape()[rank - 1];
  const std::size_t planes = z.numel() / (h * w);
  ComplexTensor<T> out = ComplexTensor<T>::zeros(z.shape());
  roll<T>(z.re(), out.re(), planes, h, w, h - h / 2, w - w / 2, false);
  roll<T>(z.im(), out.im(), planes, h, w, h - h / 2, w - w / 2, false);
  return out;
}

template <typename T>
ComplexTensor<T> mul_real(Tape<T>* tape, const ComplexTensor<T>& z,
                          const Tensor<T>& s) {
  expect_2d(z.shape(), "mul_real");
  const std::size_t rank = z.shape().size();
  const std::size_t h = z.shape()[rank - 2], w = z.shape()[rank - 1];
  const std::size_t hw = h * w;
  std::size_t groups = 1;
  std::size_t per_group_planes = z.numel() / hw;
  if (s.rank() == 2) {
    if (s.dim(0) != h || s.dim(1) != w)
      throw DimensionError("mul_real: mask " + shape_str(s.shape()) +
                           " vs spectrum " + shape_str(z.shape()));
  } else if (s.rank() == 3 && rank == 4) {
    groups = s.dim(0);
    if (s.dim(1) != h || s.dim(2) != w || groups == 0 || z.dim(1) % groups != 0)
      throw DimensionError("mul_real: mask " + shape_str(s.shape()) +
                           " vs spectrum " + shape_str(z.shape()));
    per_group_planes = z.dim(1) / groups;
  } else {
    throw DimensionError("mul_real: unsupported mask rank " +
                         shape_str(s.shape()));
  }
  // Plane p (in storage order) uses mask slice group_of(p).
  auto group_of = [=](std::size_t p) {
    return groups == 1 ? std::size_t{0} : (p % (groups * per_group_planes)) / per_group_planes;
  };
  const std::size_t planes = z.numel() / hw;
  ComplexTensor<T> out = ComplexTensor<T>::zeros(z.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const T* m = s.ptr() + group_of(p) * hw;
    const std::size_t off = p * hw;
    for (std::size_t i = 0; i < hw; ++i) {
      out.re()[off + i] = z.re()[off + i] * m[i];
      out.im()[off + i] = z.im()[off + i] * m[i];
    }
  }
  if (tape && (z.requires_grad() || s.requires_grad())) {
    out.set_requires_grad(true);
    tape->record([z, s, out, planes, hw, group_of]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> gr = out.grad_re(), gi = out.grad_im();
      for (std::size_t p = 0; p < planes; ++p) {
        const std::size_t g = group_of(p);
        const T* m = s.ptr() + g * hw;
        const std::size_t off = p * hw;
        if (z.requires_grad()) {
          std::span<T> zr = z.grad_re(), zi = z.grad_im();
          for (std::size_t i = 0; i < hw; ++i) {
            zr[off + i] += gr[off + i] * m[i];
            zi[off + i] += gi[off + i] * m[i];
          }
        }
        if (s.requires_grad()) {
          T* gs = s.grad().data() + g * hw;
          for (std::size_t i = 0; i < hw; ++i)
            gs[i] += gr[off + i] * z.re()[off + i] + gi[off + i] * z.im()[off + i];
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> abs(Tape<T>* tape, const ComplexTensor<T>& z) {
  Tensor<T> out = Tensor<T>::zeros(z.shape());
  simd::kernels<T>().complex_abs(z.re().data(), z.im().data(), out.ptr(),
                                 z.numel());
  if (tape && z.requires_grad()) {
    out.set_requires_grad(true);
    tape->record([z, out]() mutable {
      if (!out.has_grad()) return;
      std::span<const T> g = out.grad();
      std::span<T> gr = z.grad_re(), gi = z.grad_im();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const T m = out[i];
        if (m == T(0)) continue;
        gr[i] += g[i] * z.re()[i] / m;
        gi[i] += g[i] * z.im()[i] / m;
      }
    });
  }
  return out;
}

#define S2F_INSTANTIATE_FFT(T)                                                \
  template void transform_1d<T>(T*, T*, std::size_t, std::size_t, bool);     \
  template ComplexTensor<T> fft2<T>(Tape<T>*, const Tensor<T>&);              \
  template ComplexTensor<T> fft2<T>(const ComplexTensor<T>&);                 \
  template ComplexTensor<T> ifft2<T>(const ComplexTensor<T>&);                \
  template ComplexTensor<T> fftshift<T>(Tape<T>*, const ComplexTensor<T>&);   \
  template ComplexTensor<T> ifftshift<T>(const ComplexTensor<T>&);            \
  template ComplexTensor<T> mul_real<T>(Tape<T>*, const ComplexTensor<T>&,    \
                                        const Tensor<T>&);                    \
  template Tensor<T> abs<T>(Tape<T>*, const ComplexTensor<T>&);

S2F_INSTANTIATE_FFT(float)
S2F_INSTANTIATE_FFT(double)

}  // namespace s2f::fft
