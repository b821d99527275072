// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "s2f/tensor/fft.hpp"
#include "s2f/tensor/ops.hpp"

// Learnable frequency attention: each branch masks the centered spectrum of
// its features with sigmoid(M), pools per-group magnitude energy, and rescales
// the spatial channels of each group by ReLU(W[g] * E[g]).

namespace s2f::lfa {

enum class MaskMode {
  kPerGroup,  // one H x W mask per channel group: [G,H,W]
  kShared,    // one H x W mask for all channels: [H,W]
};

MaskMode parse_mask_mode(const std::string& s);
const char* mask_mode_name(MaskMode m);

struct LfaConfig {
  std::size_t channels = 32;
  std::size_t groups = 8;
  double alpha = 0.5;
  bool energy_norm = true;
  MaskMode mask_mode = MaskMode::kPerGroup;
  std::size_t height = 256, width = 256;

  void validate() const;
};

/// D(u,v) = |(u,v) - (H/2, W/2)| / R_max, R_max the largest corner distance.
template <typename T>
Tensor<T> distance_matrix(std::size_t h, std::size_t w);

/// M_high = alpha*D + alpha, M_low = alpha*(1-D) + alpha, replicated across
/// `copies` leading slices (copies == 0 gives a bare [H,W] tensor).
template <typename T>
Tensor<T> init_high_mask(const Tensor<T>& d, T alpha, std::size_t copies);
template <typename T>
Tensor<T> init_low_mask(const Tensor<T>& d, T alpha, std::size_t copies);

/// fftshift(fft2(F)) * sigmoid(M).
template <typename T>
ComplexTensor<T> mask_spectrum(Tape<T>* tape, const Tensor<T>& f,
                               const Tensor<T>& mask);

/// E[b,g] = sum of |Z| over the g-th channel block, optionally divided by
/// H*W*C/G.
template <typename T>
Tensor<T> group_energy(Tape<T>* tape, const ComplexTensor<T>& z,
                       std::size_t groups, bool energy_norm);

/// F * ReLU(W[g] * E[b,g]) broadcast over each group's channels.
template <typename T>
Tensor<T> recalibrate(Tape<T>* tape, const Tensor<T>& f, const Tensor<T>& e,
                      const Tensor<T>& w);

template <typename T>
struct LfaBranch {
  Tensor<T> mask;     // [G,H,W] or [H,W]
  Tensor<T> weights;  // [G]
};

template <typename T>
struct LfaState {
  LfaConfig cfg;
  LfaBranch<T> high;  // texture-rich branch
  LfaBranch<T> low;   // texture-poor branch

  static LfaState make(const LfaConfig& cfg);
  /// Initial masks for this configuration, for learned-minus-init diffs.
  Tensor<T> initial_high() const;
  Tensor<T> initial_low() const;
};

struct LfaBypass {
  bool high = false;
  bool low = false;
};

template <typename T>
struct LfaOutput {
  Tensor<T> rich, poor;
  Tensor<T> energy_rich, energy_poor;  // [B,G], undefined when bypassed
};

template <typename T>
LfaOutput<T> lfa_forward(Tape<T>* tape, const Tensor<T>& f_rich,
                         const Tensor<T>& f_poor, LfaState<T>& state,
                         LfaBypass bypass = {});

}  // namespace s2f::lfa
