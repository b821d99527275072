// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "s2f/srm/srm.hpp"

namespace s2f::srm {
namespace {

using T = Tensor<double>;

const SrmKernel& find(char base, const char* dir) {
  for (const SrmKernel& k : filter_bank())
    if (k.base == base && std::string(k.direction) == dir) return k;
  throw std::runtime_error("missing kernel");
}

TEST(Bank, ThirtyDistinctZeroSumKernels) {
  const auto& bank = filter_bank();
  ASSERT_EQ(bank.size(), 30u);
  std::set<Kernel5> seen;
  std::map<char, int> per_base;
  for (const SrmKernel& k : bank) {
    int s = 0, nz = 0;
    for (const auto& row : k.k)
      for (int v : row) s += v, nz += v != 0;
    EXPECT_EQ(s, 0) << k.base << " " << k.direction;
    EXPECT_GT(nz, 0);
    seen.insert(k.k);
    ++per_base[k.base];
  }
  EXPECT_EQ(seen.size(), 30u);
  EXPECT_EQ(per_base, (std::map<char, int>{{'a', 8}, {'b', 8}, {'c', 4}, {'d', 4}, {'e', 4}, {'f', 1}, {'g', 1}}));
}

TEST(Bank, SquareKernelCoefficients) {
  const Kernel5& g = find('g', "none").k;
  EXPECT_EQ(g[2][2], -12);
  EXPECT_EQ(g[0][0], -1);
  EXPECT_EQ(g[1][1], -6);
  EXPECT_EQ(g[1][2], 8);
  const Kernel5& f = find('f', "none").k;
  EXPECT_EQ(f[2][2], -4);
  EXPECT_EQ(f[1][1], -1);
}

TEST(Bank, OppositeFirstOrderKernelsMirror) {
  const Kernel5& up = find('a', "up").k;
  const Kernel5& down = find('a', "down").k;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_EQ(down[y][x], up[4 - y][x]);
  const Kernel5& left = find('a', "left").k;
  const Kernel5& right = find('a', "right").k;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_EQ(left[y][x], right[y][4 - x]);
}

TEST(Bank, EdgeVariantsAreQuarterTurns) {
  for (char base : {'d', 'e'}) {
    const char* order[4] = {"up", "right", "down", "left"};
    for (int i = 0; i < 4; ++i) {
      const Kernel5& a = find(base, order[i]).k;
      const Kernel5& b = find(base, order[(i + 1) % 4]).k;
      for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) EXPECT_EQ(b[y][x], a[4 - x][y]) << base << order[i];
    }
  }
}

TEST(Residual, ConstantImageIsExactlyZero) {
  const T x = T::full({2, 3, 7, 9}, 0.6);
  const T r = apply_srm(x);
  ASSERT_EQ(r.shape(), (Shape{2, 90, 7, 9}));
  for (double v : r.data()) EXPECT_EQ(v, 0.0);
}

TEST(Residual, VerticalStepEdgeFirstOrder) {
  // Five columns: 0.2 on x < 3, 0.9 from x = 3.
  T x = T::zeros({1, 3, 5, 5});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t xx = 0; xx < 5; ++xx) x[(c * 5 + y) * 5 + xx] = xx < 3 ? 0.2 : 0.9;
  const T r = apply_srm(x);
  std::size_t k_right = 0;
  while (std::string(filter_bank()[k_right].direction) != "right") ++k_right;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 5; ++y)
      for (std::size_t xx = 0; xx < 5; ++xx) {
        const double v = r[((3 * k_right + c) * 5 + y) * 5 + xx];
        EXPECT_NEAR(v, xx == 2 ? 0.7 : 0.0, 1e-15);
      }
}

TEST(Residual, MatchesDepthwiseLoopOracle) {
  Rng rng(1);
  const std::size_t h = 9, w = 6;
  const T x = oracle::random_tensor({2, 3, h, w}, rng, 0, 1);
  const T r = apply_srm(x);
  const auto& bank = filter_bank();
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 30; ++k)
      for (std::size_t c = 0; c < 3; ++c)
        for (long y = 0; y < long(h); ++y)
          for (long xx = 0; xx < long(w); ++xx) {
            double acc = 0;
            for (long i = 0; i < 5; ++i)
              for (long j = 0; j < 5; ++j) {
                const long sy = std::clamp(y + i - 2, 0L, long(h) - 1);
                const long sx = std::clamp(xx + j - 2, 0L, long(w) - 1);
                acc += bank[k].k[i][j] * x[((b * 3 + c) * h + sy) * w + sx];
              }
            ASSERT_NEAR(r[((b * 90 + 3 * k + c) * h + y) * w + xx], acc, 1e-12);
          }
}

TEST(Residual, RejectsWrongChannelCount) {
  EXPECT_THROW(apply_srm(T::zeros({1, 4, 5, 5})), DimensionError);
}

TEST(Encoder, ShapeNonNegativityAndGradient) {
  Rng rng(2);
  SrmEncoder<double> enc = SrmEncoder<double>::make(rng);
  const T res = apply_srm(oracle::random_tensor({2, 3, 6, 6}, rng, 0, 1));
  const T y = enc.forward(nullptr, res, true);
  ASSERT_EQ(y.shape(), (Shape{2, 32, 6, 6}));
  for (double v : y.data()) EXPECT_GE(v, 0.0);

  // Finite differences over a subset of the weight tensor (full FD is slow).
  oracle::Projector proj(3);
  Tape<double> tape;
  enc.weight.zero_grad();
  T loss = proj(&tape, enc.forward(&tape, res, true));
  tape.backward(loss);
  double worst = 0;
  for (std::size_t i = 0; i < enc.weight.numel(); i += 97) {
    std::span<double> one(enc.weight.ptr() + i, 1);
    const auto num = oracle::numeric_grad(one, [&] { return proj(nullptr, enc.forward(nullptr, res, true))[0]; });
    const double a = enc.weight.grad()[i];
    worst = std::max(worst, std::abs(a - num[0]) / std::max({std::abs(a), std::abs(num[0]), 1e-6}));
  }
  EXPECT_LT(worst, 1e-3);
  EXPECT_THROW(enc.forward(nullptr, T::zeros({1, 30, 4, 4}), true), DimensionError);
}

}  // namespace
}  // namespace s2f::srm
