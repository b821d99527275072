// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "s2f/tensor/adam.hpp"

namespace s2f {
namespace {

using T = Tensor<double>;

TEST(Adam, MatchesHandSteppedReference) {
  const double g = 0.3, lr = 1e-2, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<T> params{T::full({1}, 1.0, true)};
  AdamState<double> st = AdamState<double>::for_params(params);
  const AdamConfig cfg{lr, b1, b2, eps};
  double p = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 25; ++t) {
    params[0].grad()[0] = g;
    adam_step(params, st, cfg);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
    ASSERT_NEAR(params[0][0], p, 1e-12) << "step " << t;
  }
}

TEST(Adam, ZeroGradientLeavesParams) {
  std::vector<T> params{T::full({3}, 0.7, true), T::full({2}, -1.0, true)};
  AdamState<double> st = AdamState<double>::for_params(params);
  params[0].zero_grad();  // second param never gets a grad buffer
  for (int i = 0; i < 5; ++i) adam_step(params, st, {});
  for (double v : params[0].data()) EXPECT_EQ(v, 0.7);
  for (double v : params[1].data()) EXPECT_EQ(v, -1.0);
}

TEST(Adam, ZeroLearningRateLeavesParams) {
  std::vector<T> params{T::full({4}, 0.25, true)};
  AdamState<double> st = AdamState<double>::for_params(params);
  for (double& g : params[0].grad()) g = 1.5;
  AdamConfig cfg;
  cfg.lr = 0;
  adam_step(params, st, cfg);
  for (double v : params[0].data()) EXPECT_EQ(v, 0.25);
}

TEST(Adam, FloatParamsTrackDoubleReference) {
  std::vector<Tensor<float>> pf{Tensor<float>::full({1}, 1.0f, true)};
  AdamState<float> st = AdamState<float>::for_params(pf);
  double p = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 10; ++t) {
    const double g = 0.1 * t;
    pf[0].grad()[0] = static_cast<float>(g);
    adam_step(pf, st, {});
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    p -= 1e-4 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(pf[0][0], p, 1e-6);
}

}  // namespace
}  // namespace s2f
