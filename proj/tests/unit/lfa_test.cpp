// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "s2f/lfa/lfa.hpp"
#include "s2f/tensor/fft.hpp"

namespace s2f::lfa {
namespace {

using T = Tensor<double>;
using C = ComplexTensor<double>;

T cyclic_shift(const T& x, std::size_t dy, std::size_t dx) {
  const std::size_t b = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  T y = T::zeros(x.shape());
  for (std::size_t p = 0; p < b * c; ++p)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        y[(p * h + (i + dy) % h) * w + (j + dx) % w] = x[(p * h + i) * w + j];
  return y;
}

TEST(Distance, CenterCornerAndHandValues) {
  const T d = distance_matrix<double>(4, 4);
  EXPECT_EQ(d[2 * 4 + 2], 0.0);
  EXPECT_DOUBLE_EQ(d[0], 1.0);
  EXPECT_NEAR(d[2 * 4 + 0], 2 / std::sqrt(8.0), 1e-15);
  for (auto [h, w] : {std::pair{7, 5}, {8, 3}, {16, 16}}) {
    const T m = distance_matrix<double>(h, w);
    double mx = 0;
    for (double v : m.data()) mx = std::max(mx, v);
    EXPECT_DOUBLE_EQ(mx, 1.0);
    EXPECT_EQ(m[(h / 2) * w + w / 2], 0.0);
  }
}

TEST(InitMasks, Identities) {
  for (const double alpha : {0.5, 0.25, 1.3}) {
    const T d = distance_matrix<double>(9, 12);
    const T hi = init_high_mask(d, alpha, 3), lo = init_low_mask(d, alpha, 3);
    ASSERT_EQ(hi.shape(), (Shape{3, 9, 12}));
    for (std::size_t i = 0; i < hi.numel(); ++i) EXPECT_NEAR(hi[i] + lo[i], 3 * alpha, 1e-15);
    const std::size_t center = 4 * 12 + 6;
    EXPECT_DOUBLE_EQ(hi[center], alpha);
    EXPECT_DOUBLE_EQ(lo[center], 2 * alpha);
    EXPECT_DOUBLE_EQ(hi[0], 2 * alpha);  // (0,0) is a farthest corner for even H, W
    EXPECT_DOUBLE_EQ(lo[0], alpha);
  }
  EXPECT_EQ(init_high_mask(distance_matrix<double>(4, 4), 0.5, 0).shape(), (Shape{4, 4}));
}

TEST(State, MaskModesAndValidation) {
  LfaConfig cfg;
  cfg.height = cfg.width = 8;
  LfaState<double> s = LfaState<double>::make(cfg);
  EXPECT_EQ(s.high.mask.shape(), (Shape{8, 8, 8}));
  EXPECT_EQ(s.low.weights.shape(), (Shape{8}));
  for (double w : s.high.weights.data()) EXPECT_EQ(w, 1.0);
  cfg.mask_mode = MaskMode::kShared;
  EXPECT_EQ(LfaState<double>::make(cfg).high.mask.shape(), (Shape{8, 8}));
  cfg.groups = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(parse_mask_mode("bogus"), std::invalid_argument);
}

TEST(MaskSpectrum, SigmoidLimits) {
  Rng rng(1);
  const T f = oracle::random_tensor({1, 4, 6, 6}, rng);
  const C ref = fft::fftshift<double>(nullptr, fft::fft2<double>(nullptr, f));
  const C half = mask_spectrum<double>(nullptr, f, T::zeros({6, 6}));
  const C full = mask_spectrum<double>(nullptr, f, T::full({6, 6}, 30.0));
  for (std::size_t i = 0; i < ref.numel(); ++i) {
    EXPECT_NEAR(half.re()[i], 0.5 * ref.re()[i], 1e-12);
    EXPECT_NEAR(half.im()[i], 0.5 * ref.im()[i], 1e-12);
    EXPECT_NEAR(full.re()[i], ref.re()[i], 1e-9 * (1 + std::abs(ref.re()[i])));
  }
  EXPECT_THROW(mask_spectrum<double>(nullptr, f, T::zeros({5, 6})), DimensionError);
}

TEST(MaskSpectrum, GradientWrtMask) {
  Rng rng(2);
  const T f = oracle::random_tensor({2, 4, 6, 6}, rng);
  for (const Shape& ms : {Shape{6, 6}, Shape{2, 6, 6}}) {
    const auto errs = oracle::gradcheck({oracle::random_tensor(ms, rng)}, [&](Tape<double>* t, std::vector<T>& in) {
      return ops::sum(t, fft::abs(t, mask_spectrum(t, f, in[0])));
    });
    EXPECT_LT(errs[0], 1e-3);
  }
}

TEST(GroupEnergy, KnownValues) {
  C z = C::zeros({2, 4, 3, 3});
  const T zero = group_energy<double>(nullptr, z, 2, false);
  for (double v : zero.data()) EXPECT_EQ(v, 0.0);
  z.re()[4] = 3;
  z.im()[4] = 4;
  const T e = group_energy<double>(nullptr, z, 2, false);
  EXPECT_DOUBLE_EQ(e[0], 5.0);
  EXPECT_EQ(e[1], 0.0);
  const T en = group_energy<double>(nullptr, z, 2, true);
  EXPECT_DOUBLE_EQ(en[0], 5.0 / (9 * 2));
}

TEST(GroupEnergy, MatchesMagnitudeSumOracle) {
  Rng rng(3);
  const std::size_t b = 3, c = 8, h = 5, w = 4;
  C z = C::zeros({b, c, h, w});
  for (std::size_t i = 0; i < z.numel(); ++i) z.re()[i] = rng.uniform(-2, 2), z.im()[i] = rng.uniform(-2, 2);
  for (std::size_t g : {1, 2, 4, 8}) {
    const T e = group_energy<double>(nullptr, z, g, false);
    const std::size_t cg = c / g;
    for (std::size_t n = 0; n < b; ++n)
      for (std::size_t k = 0; k < g; ++k) {
        double acc = 0;
        for (std::size_t ch = k * cg; ch < (k + 1) * cg; ++ch)
          for (std::size_t i = 0; i < h * w; ++i) {
            const std::size_t at = (n * c + ch) * h * w + i;
            acc += std::sqrt(z.re()[at] * z.re()[at] + z.im()[at] * z.im()[at]);
          }
        EXPECT_NEAR(e[n * g + k], acc, 1e-9);
      }
  }
}

TEST(GroupEnergy, InvariantUnderCyclicShifts) {
  Rng rng(4);
  const T f = oracle::random_tensor({2, 8, 8, 6}, rng);
  const T mask = oracle::random_tensor({4, 8, 6}, rng, -2, 2);
  const T e0 = group_energy<double>(nullptr, mask_spectrum<double>(nullptr, f, mask), 4, true);
  for (auto [dy, dx] : {std::pair{1, 0}, {0, 3}, {5, 2}, {7, 5}}) {
    const T e1 = group_energy<double>(nullptr, mask_spectrum<double>(nullptr, cyclic_shift(f, dy, dx), mask), 4, true);
    for (std::size_t i = 0; i < e0.numel(); ++i) EXPECT_NEAR(e1[i], e0[i], 1e-6 * (1 + e0[i]));
  }
}

TEST(Recalibrate, GateUnitGainAndLoopOracle) {
  Rng rng(5);
  const T f = oracle::random_tensor({2, 4, 3, 3}, rng);
  const T ones = recalibrate<double>(nullptr, f, T::full({2, 2}, 1.0), T::full({2}, 1.0));
  for (std::size_t i = 0; i < f.numel(); ++i) EXPECT_EQ(ones[i], f[i]);
  const T gated = recalibrate<double>(nullptr, f, T::full({2, 2}, 1.0), T::from({2}, {-1.0, 2.0}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 18; ++i) {
      EXPECT_EQ(gated[n * 36 + i], 0.0);
      EXPECT_EQ(gated[n * 36 + 18 + i], 2.0 * f[n * 36 + 18 + i]);
    }
  const T e = oracle::random_tensor({2, 2}, rng, -1, 1), w = oracle::random_tensor({2}, rng, -1, 1);
  const T y = recalibrate<double>(nullptr, f, e, w);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < 9; ++i)
        EXPECT_EQ(y[(n * 4 + c) * 9 + i], f[(n * 4 + c) * 9 + i] * std::max(0.0, w[c / 2] * e[n * 2 + c / 2]));
}

TEST(Forward, BypassIsIdentityAndShapesHold) {
  Rng rng(6);
  LfaConfig cfg;
  cfg.height = cfg.width = 8;
  LfaState<double> s = LfaState<double>::make(cfg);
  const T a = oracle::random_tensor({2, 32, 8, 8}, rng), b = oracle::random_tensor({2, 32, 8, 8}, rng);
  const LfaOutput<double> id = lfa_forward<double>(nullptr, a, b, s, {true, true});
  for (std::size_t i = 0; i < a.numel(); ++i) {
    EXPECT_EQ(id.rich[i], a[i]);
    EXPECT_EQ(id.poor[i], b[i]);
  }
  EXPECT_FALSE(id.energy_rich.defined());
  const LfaOutput<double> o = lfa_forward<double>(nullptr, a, b, s);
  EXPECT_EQ(o.rich.shape(), a.shape());
  EXPECT_EQ(o.energy_poor.shape(), (Shape{2, 8}));
  EXPECT_THROW(lfa_forward<double>(nullptr, oracle::random_tensor({2, 32, 4, 4}, rng), b, s), DimensionError);
}

TEST(Forward, AllLfaParametersReceiveGradient) {
  Rng rng(7);
  LfaConfig cfg;
  cfg.height = cfg.width = 8;
  LfaState<double> s = LfaState<double>::make(cfg);
  // ReLU-like non-negative features, as produced by the encoder.
  const T a = oracle::random_tensor({2, 32, 8, 8}, rng, 0, 1), b = oracle::random_tensor({2, 32, 8, 8}, rng, 0, 1);
  oracle::Projector proj(8);
  Tape<double> tape;
  const LfaOutput<double> o = lfa_forward(&tape, a, b, s);
  T loss = proj(&tape, ops::concat_channels(&tape, o.rich, o.poor));
  tape.backward(loss);
  for (const T* p : {&s.high.mask, &s.low.mask, &s.high.weights, &s.low.weights}) {
    double mx = 0;
    for (double g : p->grad()) mx = std::max(mx, std::abs(g));
    EXPECT_GT(mx, 0.0);
  }
}

}  // namespace
}  // namespace s2f::lfa
