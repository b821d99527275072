// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/tensor/adam.hpp"

#include <cmath>

namespace s2f {

template <typename T>
AdamState<T> AdamState<T>::for_params(const std::vector<Tensor<T>>& params) {
  AdamState st;
  for (const Tensor<T>& p : params) {
    st.m.emplace_back(p.numel(), T(0));
    st.v.emplace_back(p.numel(), T(0));
  }
  return st;
}

template <typename T>
void adam_step(std::vector<Tensor<T>>& params, AdamState<T>& state,
               const AdamConfig& cfg) {
  if (state.m.size() != params.size())
    throw DimensionError("adam_step: optimizer state covers " +
                         std::to_string(state.m.size()) + " tensors, got " +
                         std::to_string(params.size()));
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = params[k];
    std::vector<T>& m = state.m[k];
    std::vector<T>& v = state.v[k];
    if (m.size() != p.numel())
      throw DimensionError("adam_step: state shape mismatch for tensor " +
                           std::to_string(k));
    std::span<const T> g = p.has_grad() ? std::span<const T>(p.grad())
                                        : std::span<const T>{};
    for (std::size_t i = 0; i < p.numel(); ++i) {
      const double gi = g.empty() ? 0.0 : static_cast<double>(g[i]);
      const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
      p[i] = static_cast<T>(static_cast<double>(p[i]) - update);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::vector<Tensor<float>>&, AdamState<float>&,
                               const AdamConfig&);
template void adam_step<double>(std::vector<Tensor<double>>&,
                                AdamState<double>&, const AdamConfig&);

}  // namespace s2f
