// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "s2f/rng.hpp"
#include "s2f/tensor/tensor.hpp"

namespace s2f {

/// Fills t with U(-bound, bound).
template <typename T>
void uniform_fill(Tensor<T>& t, double bound, Rng& rng) {
  for (T& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

/// He-uniform: bound sqrt(6 / fan_in), for layers followed by ReLU.
template <typename T>
Tensor<T> he_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape), true);
  uniform_fill(t, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
  return t;
}

}  // namespace s2f
