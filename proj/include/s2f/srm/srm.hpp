// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "s2f/rng.hpp"
#include "s2f/tensor/ops.hpp"

namespace s2f::srm {

inline constexpr std::size_t kKernels = 30;
inline constexpr std::size_t kResidualChannels = kKernels * 3;
inline constexpr std::size_t kEncoderChannels = 32;

using Kernel5 = std::array<std::array<int, 5>, 5>;

struct SrmKernel {
  char base;              // 'a'..'g'
  const char* direction;  // "up", "right", ..., "none"
  Kernel5 k;
};

/// The 30 fixed high-pass kernels: a x8, b x8, c x4, d x4, e x4, f, g.
/// Channel order of apply_srm follows this order, then R, G, B.
const std::array<SrmKernel, kKernels>& filter_bank();

/// Depthwise residuals of x[B,3,H,W]: out[B,90,H,W], channel 3*k + c is
/// kernel k on color c. Borders are clamped; no gradient is recorded.
template <typename T>
Tensor<T> apply_srm(const Tensor<T>& x);

/// Conv(90->32, 3x3, pad 1, no bias) + BN + ReLU.
template <typename T>
struct SrmEncoder {
  Tensor<T> weight;  // [32,90,3,3]
  ops::BatchNorm2d<T> bn;

  static SrmEncoder make(Rng& rng);
  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& residuals, bool training);
};

}  // namespace s2f::srm
