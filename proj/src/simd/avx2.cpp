// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached through the
// dispatch table after a cpuid check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "s2f/simd/kernels.hpp"

namespace s2f::simd::avx2 {
namespace {

// Thin traits layer so the float and double kernels share one body.
template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t kLanes = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg sqrt(reg a) { return _mm256_sqrt_ps(a); }
  static reg max(reg a, reg b) { return _mm256_max_ps(a, b); }
  static reg gt_mask(reg a, reg b) { return _mm256_cmp_ps(a, b, _CMP_GT_OQ); }
  static reg and_(reg a, reg b) { return _mm256_and_ps(a, b); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
  }
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t kLanes = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg fmadd(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg sqrt(reg a) { return _mm256_sqrt_pd(a); }
  static reg max(reg a, reg b) { return _mm256_max_pd(a, b); }
  static reg gt_mask(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
  static reg and_(reg a, reg b) { return _mm256_and_pd(a, b); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
  }
};

// 4 x (2 * lanes) register tile over the rows of A and columns of B.
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a,
             std::size_t lda, const T* b, std::size_t ldb, T* c,
             std::size_t ldc) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  constexpr std::size_t kCols = 2 * L;
  constexpr std::size_t kKBlock = 256;

  for (std::size_t p0 = 0; p0 < k; p0 += kKBlock) {
    const std::size_t pk = std::min(kKBlock, k - p0);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      const T* a0 = a + (i + 0) * lda + p0;
      const T* a1 = a + (i + 1) * lda + p0;
      const T* a2 = a + (i + 2) * lda + p0;
      const T* a3 = a + (i + 3) * lda + p0;
      std::size_t j = 0;
      for (; j + kCols <= n; j += kCols) {
        typename V::reg c00 = V::zero(), c01 = V::zero();
        typename V::reg c10 = V::zero(), c11 = V::zero();
        typename V::reg c20 = V::zero(), c21 = V::zero();
        typename V::reg c30 = V::zero(), c31 = V::zero();
        const T* bp = b + p0 * ldb + j;
        for (std::size_t p = 0; p < pk; ++p, bp += ldb) {
          const typename V::reg b0 = V::load(bp);
          const typename V::reg b1 = V::load(bp + L);
          typename V::reg av = V::set1(a0[p]);
          c00 = V::fmadd(av, b0, c00);
          c01 = V::fmadd(av, b1, c01);
          av = V::set1(a1[p]);
          c10 = V::fmadd(av, b0, c10);
          c11 = V::fmadd(av, b1, c11);
          av = V::set1(a2[p]);
          c20 = V::fmadd(av, b0, c20);
          c21 = V::fmadd(av, b1, c21);
          av = V::set1(a3[p]);
          c30 = V::fmadd(av, b0, c30);
          c31 = V::fmadd(av, b1, c31);
        }
        T* cr = c + i * ldc + j;
        V::store(cr, V::add(V::load(cr), c00));
        V::store(cr + L, V::add(V::load(cr + L), c01));
        cr += ldc;
        V::store(cr, V::add(V::load(cr), c10));
        V::store(cr + L, V::add(V::load(cr + L), c11));
        cr += ldc;
        V::store(cr, V::add(V::load(cr), c20));
        V::store(cr + L, V::add(V::load(cr + L), c21));
        cr += ldc;
        V::store(cr, V::add(V::load(cr), c30));
        V::store(cr + L, V::add(V::load(cr + L), c31));
      }
      for (; j + L <= n; j += L) {
        typename V::reg c0 = V::zero(), c1 = V::zero(), c2 = V::zero(),
                        c3 = V::zero();
        const T* bp = b + p0 * ldb + j;
        for (std::size_t p = 0; p < pk; ++p, bp += ldb) {
          const typename V::reg b0 = V::load(bp);
          c0 = V::fmadd(V::set1(a0[p]), b0, c0);
          c1 = V::fmadd(V::set1(a1[p]), b0, c1);
          c2 = V::fmadd(V::set1(a2[p]), b0, c2);
          c3 = V::fmadd(V::set1(a3[p]), b0, c3);
        }
        T* cr = c + i * ldc + j;
        V::store(cr, V::add(V::load(cr), c0));
        V::store(cr + ldc, V::add(V::load(cr + ldc), c1));
        V::store(cr + 2 * ldc, V::add(V::load(cr + 2 * ldc), c2));
        V::store(cr + 3 * ldc, V::add(V::load(cr + 3 * ldc), c3));
      }
      for (; j < n; ++j) {
        T s0 = 0, s1 = 0, s2 = 0, s3 = 0;
        for (std::size_t p = 0; p < pk; ++p) {
          const T bv = b[(p0 + p) * ldb + j];
          s0 += a0[p] * bv;
          s1 += a1[p] * bv;
          s2 += a2[p] * bv;
          s3 += a3[p] * bv;
        }
        c[(i + 0) * ldc + j] += s0;
        c[(i + 1) * ldc + j] += s1;
        c[(i + 2) * ldc + j] += s2;
        c[(i + 3) * ldc + j] += s3;
      }
    }
    for (; i < m; ++i) {
      const T* ar = a + i * lda + p0;
      T* cr = c + i * ldc;
      std::size_t j = 0;
      for (; j + L <= n; j += L) {
        typename V::reg acc = V::zero();
        const T* bp = b + p0 * ldb + j;
        for (std::size_t p = 0; p < pk; ++p, bp += ldb)
          acc = V::fmadd(V::set1(ar[p]), V::load(bp), acc);
        V::store(cr + j, V::add(V::load(cr + j), acc));
      }
      for (; j < n; ++j) {
        T s = 0;
        for (std::size_t p = 0; p < pk; ++p) s += ar[p] * b[(p0 + p) * ldb + j];
        cr[j] += s;
      }
    }
  }
}

template <typename T>
T dot(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  typename V::reg a0 = V::zero(), a1 = V::zero(), a2 = V::zero(),
                  a3 = V::zero();
  std::size_t i = 0;
  for (; i + 4 * L <= n; i += 4 * L) {
    a0 = V::fmadd(V::load(x + i), V::load(y + i), a0);
    a1 = V::fmadd(V::load(x + i + L), V::load(y + i + L), a1);
    a2 = V::fmadd(V::load(x + i + 2 * L), V::load(y + i + 2 * L), a2);
    a3 = V::fmadd(V::load(x + i + 3 * L), V::load(y + i + 3 * L), a3);
  }
  for (; i + L <= n; i += L) a0 = V::fmadd(V::load(x + i), V::load(y + i), a0);
  T acc = V::hsum(V::add(V::add(a0, a1), V::add(a2, a3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

// Elementwise kernels use separate mul/add so results match the scalar path
// exactly.
template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  const typename V::reg av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes)
    V::store(y + i, V::add(V::load(y + i), V::mul(av, V::load(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale(T alpha, T* x, std::size_t n) {
  using V = Vec<T>;
  const typename V::reg av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes)
    V::store(x + i, V::mul(V::load(x + i), av));
  for (; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void complex_abs(const T* re, const T* im, T* out, std::size_t n) {
  using V = Vec<T>;
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) {
    const typename V::reg r = V::load(re + i);
    const typename V::reg m = V::load(im + i);
    V::store(out + i, V::sqrt(V::add(V::mul(r, r), V::mul(m, m))));
  }
  for (; i < n; ++i) {
    const T rr = re[i] * re[i];
    const T ii = im[i] * im[i];
    out[i] = std::sqrt(rr + ii);
  }
}

template <typename T>
void relu(const T* x, T* y, std::size_t n) {
  using V = Vec<T>;
  const typename V::reg z = V::zero();
  std::size_t i = 0;
  // max(x, 0) with x in the second operand would return x for NaN; keep the
  // scalar semantics (x > 0 ? x : 0) by masking instead.
  for (; i + V::kLanes <= n; i += V::kLanes) {
    const typename V::reg v = V::load(x + i);
    V::store(y + i, V::and_(V::gt_mask(v, z), v));
  }
  for (; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* gy, T* gx, std::size_t n) {
  using V = Vec<T>;
  const typename V::reg z = V::zero();
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) {
    const typename V::reg mask = V::gt_mask(V::load(x + i), z);
    V::store(gx + i, V::add(V::load(gx + i), V::and_(mask, V::load(gy + i))));
  }
  for (; i < n; ++i) gx[i] += x[i] > T(0) ? gy[i] : T(0);
}

template <typename T>
constexpr KernelTable<T> kTable{&gemm_nn<T>, &dot<T>,         &axpy<T>,
                                &scale<T>,   &complex_abs<T>, &relu<T>,
                                &relu_backward<T>};

}  // namespace

template <typename T>
const KernelTable<T>& table() {
  return kTable<T>;
}

template const KernelTable<float>& table<float>();
template const KernelTable<double>& table<double>();

}  // namespace s2f::simd::avx2
