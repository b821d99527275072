// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/srm/srm.hpp"

#include <algorithm>

#include "s2f/tensor/init.hpp"

namespace s2f::srm {
namespace {

struct Dir {
  const char* name;
  int dy, dx;
};

// Order of the eight compass variants of kernels a and b.
constexpr std::array<Dir, 8> kEight = {{{"up-right", -1, 1},
                                        {"right", 0, 1},
                                        {"down-right", 1, 1},
                                        {"down", 1, 0},
                                        {"down-left", 1, -1},
                                        {"left", 0, -1},
                                        {"up-left", -1, -1},
                                        {"up", -1, 0}}};

// Line orientations of kernel c (a symmetric stencil, so a line not a ray).
constexpr std::array<Dir, 4> kLines = {{{"right", 0, 1},
                                        {"down", 1, 0},
                                        {"up-right", -1, 1},
                                        {"down-right", 1, 1}}};

// Quarter turns for the edge kernels; entry i is i clockwise turns from "up".
constexpr std::array<const char*, 4> kQuarter = {"up", "right", "down", "left"};

constexpr Kernel5 first_order(int dy, int dx) {
  Kernel5 k{};
  k[2][2] = -1;
  k[2 + dy][2 + dx] = 1;
  return k;
}

// Taps 1, -3, 3, -1 at offsets -1, 0, 1, 2 along (dy, dx).
constexpr Kernel5 third_order(int dy, int dx) {
  Kernel5 k{};
  constexpr int coef[4] = {1, -3, 3, -1};
  for (int t = -1; t <= 2; ++t) k[2 + t * dy][2 + t * dx] = coef[t + 1];
  return k;
}

constexpr Kernel5 second_order(int dy, int dx) {
  Kernel5 k{};
  k[2 - dy][2 - dx] = 1;
  k[2][2] = -2;
  k[2 + dy][2 + dx] = 1;
  return k;
}

constexpr Kernel5 rotate_cw(const Kernel5& k) {
  Kernel5 r{};
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) r[y][x] = k[4 - x][y];
  return r;
}

constexpr Kernel5 rotate_cw(Kernel5 k, int turns) {
  for (int i = 0; i < turns; ++i) k = rotate_cw(k);
  return k;
}

constexpr Kernel5 kEdge3 = {{{0, 0, 0, 0, 0},
                             {0, -1, 2, -1, 0},
                             {0, 2, -4, 2, 0},
                             {0, 0, 0, 0, 0},
                             {0, 0, 0, 0, 0}}};

constexpr Kernel5 kEdge5 = {{{-1, 2, -2, 2, -1},
                             {2, -6, 8, -6, 2},
                             {-2, 8, -12, 8, -2},
                             {0, 0, 0, 0, 0},
                             {0, 0, 0, 0, 0}}};

constexpr Kernel5 kSquare3 = {{{0, 0, 0, 0, 0},
                               {0, -1, 2, -1, 0},
                               {0, 2, -4, 2, 0},
                               {0, -1, 2, -1, 0},
                               {0, 0, 0, 0, 0}}};

constexpr Kernel5 kSquare5 = {{{-1, 2, -2, 2, -1},
                               {2, -6, 8, -6, 2},
                               {-2, 8, -12, 8, -2},
                               {2, -6, 8, -6, 2},
                               {-1, 2, -2, 2, -1}}};

constexpr std::array<SrmKernel, kKernels> build() {
  std::array<SrmKernel, kKernels> bank{};
  std::size_t n = 0;
  for (const Dir& d : kEight) bank[n++] = {'a', d.name, first_order(d.dy, d.dx)};
  for (const Dir& d : kEight) bank[n++] = {'b', d.name, third_order(d.dy, d.dx)};
  for (const Dir& d : kLines) bank[n++] = {'c', d.name, second_order(d.dy, d.dx)};
  // Listed order right, down, left, up = 1, 2, 3, 0 clockwise turns.
  for (int i = 1; i <= 4; ++i)
    bank[n++] = {'d', kQuarter[i % 4], rotate_cw(kEdge3, i % 4)};
  for (int i = 1; i <= 4; ++i)
    bank[n++] = {'e', kQuarter[i % 4], rotate_cw(kEdge5, i % 4)};
  bank[n++] = {'f', "none", kSquare3};
  bank[n++] = {'g', "none", kSquare5};
  return bank;
}

constexpr std::array<SrmKernel, kKernels> kBank = build();

constexpr bool zero_sum(const Kernel5& k) {
  int s = 0;
  for (const auto& row : k)
    for (int v : row) s += v;
  return s == 0;
}

constexpr bool all_zero_sum() {
  for (const SrmKernel& k : kBank)
    if (!zero_sum(k.k)) return false;
  return true;
}
static_assert(all_zero_sum());

struct Tap {
  int dy, dx, w;
};

std::vector<std::vector<Tap>> sparse_taps() {
  std::vector<std::vector<Tap>> taps(kKernels);
  for (std::size_t k = 0; k < kKernels; ++k)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 5; ++x)
        if (kBank[k].k[y][x] != 0) taps[k].push_back({y, x, kBank[k].k[y][x]});
  return taps;
}

}  // namespace

const std::array<SrmKernel, kKernels>& filter_bank() { return kBank; }

template <typename T>
Tensor<T> apply_srm(const Tensor<T>& x) {
  if (x.rank() != 4 || x.dim(1) != 3)
    throw DimensionError("apply_srm: expected [B,3,H,W], got " +
                         shape_str(x.shape()));
  static const std::vector<std::vector<Tap>> taps = sparse_taps();
  const std::size_t nb = x.dim(0), h = x.dim(2), w = x.dim(3);
  const std::size_t ph = h + 4, pw = w + 4;
  Tensor<T> out = Tensor<T>::zeros({nb, kResidualChannels, h, w});
  std::vector<T> pad(ph * pw);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t c = 0; c < 3; ++c) {
      const T* src = x.ptr() + (b * 3 + c) * h * w;
      for (std::size_t y = 0; y < ph; ++y) {
        const std::size_t sy = static_cast<std::size_t>(
            std::clamp<long>(static_cast<long>(y) - 2, 0, static_cast<long>(h) - 1));
        for (std::size_t xx = 0; xx < pw; ++xx) {
          const std::size_t sx = static_cast<std::size_t>(std::clamp<long>(
              static_cast<long>(xx) - 2, 0, static_cast<long>(w) - 1));
          pad[y * pw + xx] = src[sy * w + sx];
        }
      }
      for (std::size_t k = 0; k < kKernels; ++k) {
        T* dst = out.ptr() + (b * kResidualChannels + 3 * k + c) * h * w;
        // Kernels sum to zero, so taps are applied to differences from the
        // centre pixel; flat regions then give exactly 0.
        for (const Tap& t : taps[k]) {
          if (t.dy == 2 && t.dx == 2) continue;
          const T wt = static_cast<T>(t.w);
          for (std::size_t y = 0; y < h; ++y) {
            const T* row = pad.data() + (y + t.dy) * pw + t.dx;
            const T* ctr = pad.data() + (y + 2) * pw + 2;
            T* o = dst + y * w;
            for (std::size_t xx = 0; xx < w; ++xx) o[xx] += wt * (row[xx] - ctr[xx]);
          }
        }
      }
    }
  return out;
}

template <typename T>
SrmEncoder<T> SrmEncoder<T>::make(Rng& rng) {
  SrmEncoder e;
  e.weight = he_uniform<T>({kEncoderChannels, kResidualChannels, 3, 3},
                           kResidualChannels * 9, rng);
  e.bn = ops::BatchNorm2d<T>::make(kEncoderChannels);
  return e;
}

template <typename T>
Tensor<T> SrmEncoder<T>::forward(Tape<T>* tape, const Tensor<T>& residuals,
                                 bool training) {
  if (residuals.rank() != 4 || residuals.dim(1) != kResidualChannels)
    throw DimensionError("srm encoder: expected 90 input channels, got " +
                         shape_str(residuals.shape()));
  Tensor<T> y = ops::conv2d(tape, residuals, weight, 1, 1);
  y = ops::batchnorm2d(tape, y, bn, training);
  return ops::relu(tape, y);
}

template Tensor<float> apply_srm<float>(const Tensor<float>&);
template Tensor<double> apply_srm<double>(const Tensor<double>&);
template struct SrmEncoder<float>;
template struct SrmEncoder<double>;

}  // namespace s2f::srm
