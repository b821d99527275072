// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "s2f/tensor/tensor.hpp"

// Differentiable operators. Every op takes an optional tape: with a null tape
// (or no operand requiring grad) nothing is recorded and the output does not
// require grad.
namespace s2f::ops {

/// Cross-correlation of x[B,C,H,W] with w[O,C,k,k], no bias.
/// Output [B,O,H',W'] with H' = (H + 2p - k) / stride + 1.
template <typename T>
Tensor<T> conv2d(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w,
                 int stride, int padding);

template <typename T>
struct BatchNorm2d {
  Tensor<T> gamma, beta;               // learnable, [C]
  Tensor<T> running_mean, running_var;  // buffers, [C]
  T momentum = T(0.1);
  T eps = T(1e-5);

  static BatchNorm2d make(std::size_t channels);
  std::size_t channels() const { return gamma.numel(); }
};

/// Training mode normalizes with batch statistics and updates the running
/// statistics (unbiased variance); eval mode uses the running statistics.
template <typename T>
Tensor<T> batchnorm2d(Tape<T>* tape, const Tensor<T>& x, BatchNorm2d<T>& bn,
                      bool training);

/// While installed on the current thread, relu appends one byte per input
/// element (1 if positive). Finite-difference checks use it to tell whether a
/// stencil crossed a kink. With `pinned` set, relu instead gates its input by
/// that recorded pattern (consumed in call order), which freezes the active
/// set. Pass nullptr to uninstall.
struct ReluTrace {
  std::vector<std::uint8_t> signs;
  const std::vector<std::uint8_t>* pinned = nullptr;
  std::size_t cursor = 0;
};
void set_relu_trace(ReluTrace* trace);

template <typename T>
Tensor<T> relu(Tape<T>* tape, const Tensor<T>& x);

template <typename T>
Tensor<T> sigmoid(Tape<T>* tape, const Tensor<T>& x);

/// Mean over k x k windows with the given stride, no padding.
template <typename T>
Tensor<T> avgpool2d(Tape<T>* tape, const Tensor<T>& x, int k = 2,
                    int stride = 2);

/// Global spatial mean: [B,C,H,W] -> [B,C,1,1].
template <typename T>
Tensor<T> adaptive_avgpool(Tape<T>* tape, const Tensor<T>& x);

template <typename T>
Tensor<T> reshape(Tape<T>* tape, const Tensor<T>& x, Shape shape);

/// x[B,D] * w[D,O] + b[O].
template <typename T>
Tensor<T> linear(Tape<T>* tape, const Tensor<T>& x, const Tensor<T>& w,
                 const Tensor<T>& b);

/// Channel concatenation [B,Ca,H,W] ++ [B,Cb,H,W] -> [B,Ca+Cb,H,W].
template <typename T>
Tensor<T> concat_channels(Tape<T>* tape, const Tensor<T>& a,
                          const Tensor<T>& b);

/// Batch concatenation along dim 0.
template <typename T>
Tensor<T> concat_batch(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b);

/// Rows [begin, end) of dim 0.
template <typename T>
Tensor<T> slice_batch(Tape<T>* tape, const Tensor<T>& x, std::size_t begin,
                      std::size_t end);

template <typename T>
Tensor<T> sum(Tape<T>* tape, const Tensor<T>& x);

template <typename T>
Tensor<T> mul(Tape<T>* tape, const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(Tape<T>* tape, const Tensor<T>& x, T factor);

/// w[G] broadcast over e[B,G]: out[b,g] = w[g] * e[b,g].
template <typename T>
Tensor<T> mul_rowwise(Tape<T>* tape, const Tensor<T>& w, const Tensor<T>& e);

/// Channel-group recalibration: out[b,c,:,:] = x[b,c,:,:] * gain[b, c / (C/G)]
/// for x[B,C,H,W] and gain[B,G].
template <typename T>
Tensor<T> scale_channel_groups(Tape<T>* tape, const Tensor<T>& x,
                               const Tensor<T>& gain);

/// Mean binary cross-entropy with logits[B,1] against labels (0 real, 1 fake),
/// evaluated in the log-sum-exp stable form.
template <typename T>
Tensor<T> bce_with_logits(Tape<T>* tape, const Tensor<T>& logits,
                          std::span<const std::uint8_t> labels);

template <typename T>
T sigmoid_scalar(T z);

/// Per-group totals of x[B,C,H,W] over contiguous channel blocks and all
/// spatial positions, divided by `divisor`: out[B,G].
template <typename T>
Tensor<T> group_sum(Tape<T>* tape, const Tensor<T>& x, std::size_t groups,
                    T divisor = T(1));

}  // namespace s2f::ops
