// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

namespace s2f::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

/// Function table for the data-parallel inner loops. Every entry has a
/// scalar reference version; vector variants must agree with it bit for bit
/// on elementwise kernels and within reduction round-off on gemm/dot.
template <typename T>
struct KernelTable {
  /// C[M,N] += A[M,K] * B[K,N], row-major with leading dimensions.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const T* a,
                  std::size_t lda, const T* b, std::size_t ldb, T* c,
                  std::size_t ldc);
  T (*dot)(const T* x, const T* y, std::size_t n);
  /// y += alpha * x
  void (*axpy)(T alpha, const T* x, T* y, std::size_t n);
  /// x *= alpha
  void (*scale)(T alpha, T* x, std::size_t n);
  /// out = sqrt(re^2 + im^2)
  void (*complex_abs)(const T* re, const T* im, T* out, std::size_t n);
  /// y = max(x, 0)
  void (*relu)(const T* x, T* y, std::size_t n);
  /// gx += (x > 0) ? gy : 0
  void (*relu_backward)(const T* x, const T* gy, T* gx, std::size_t n);
};

bool isa_available(Isa isa);

/// Currently selected ISA. Chosen once from the CPU (overridable with the
/// S2F_ISA environment variable: "scalar" or "avx2").
Isa active_isa();

/// Forces a specific ISA. Throws std::runtime_error if unavailable.
void set_active_isa(Isa isa);

template <typename T>
const KernelTable<T>& kernels_for(Isa isa);

template <typename T>
const KernelTable<T>& kernels() {
  return kernels_for<T>(active_isa());
}

namespace scalar {
template <typename T>
const KernelTable<T>& table();
}  // namespace scalar

#if defined(S2F_HAVE_AVX2)
namespace avx2 {
template <typename T>
const KernelTable<T>& table();
}  // namespace avx2
#endif

}  // namespace s2f::simd
