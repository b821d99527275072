// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "s2f/tensor/tensor.hpp"

namespace s2f {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment buffers for one parameter list, in parameter order.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  std::int64_t step = 0;

  static AdamState for_params(const std::vector<Tensor<T>>& params);
};

/// One bias-corrected Adam update. Parameters without an allocated gradient
/// are treated as having a zero gradient.
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, AdamState<T>& state,
               const AdamConfig& cfg);

}  // namespace s2f
