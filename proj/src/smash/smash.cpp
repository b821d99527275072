// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/smash/smash.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace s2f::smash {

void SmashConfig::validate() const {
  if (patch_size < 2) throw std::invalid_argument("smash: patch_size must be >= 2");
  if (view_size == 0 || view_size % patch_size != 0)
    throw std::invalid_argument("smash: view_size must be a multiple of patch_size");
  if (patch_count < 2 * tiles())
    throw std::invalid_argument(
        "smash: patch_count " + std::to_string(patch_count) +
        " cannot fill two views of " + std::to_string(tiles()) + " tiles");
}

const char* sample_mode_name(SampleMode m) {
  return m == SampleMode::kGrid ? "grid" : "uniform";
}

std::uint64_t ldiv(const std::uint8_t* data, std::size_t m,
                   std::size_t row_stride) {
  std::uint64_t total = 0;
  auto px = [&](std::size_t y, std::size_t x, std::size_t c) -> int {
    return data[y * row_stride + x * 3 + c];
  };
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const int v = px(y, x, c);
        if (x + 1 < m) total += std::abs(px(y, x + 1, c) - v);
        if (y + 1 < m) {
          total += std::abs(px(y + 1, x, c) - v);
          if (x + 1 < m) total += std::abs(px(y + 1, x + 1, c) - v);
          if (x > 0) total += std::abs(px(y + 1, x - 1, c) - v);
        }
      }
  return total;
}

std::uint64_t ldiv(const image::ImageU8& patch) {
  if (patch.width != patch.height)
    throw std::invalid_argument("ldiv: patch must be square");
  return ldiv(patch.data.data(), patch.width, patch.width * 3);
}

Sampled sample_patches(const image::ImageU8& img, const SmashConfig& cfg,
                       Rng& rng) {
  const std::size_t m = cfg.patch_size;
  if (img.width < m || img.height < m)
    throw std::invalid_argument("smash: image " + std::to_string(img.width) +
                                "x" + std::to_string(img.height) +
                                " smaller than patch size " + std::to_string(m));
  const std::size_t ox = rng.below(img.width % m + 1);
  const std::size_t oy = rng.below(img.height % m + 1);
  const std::size_t cols = (img.width - ox) / m, rows = (img.height - oy) / m;
  Sampled out;
  out.patches.reserve(cfg.patch_count);
  if (cols * rows >= cfg.patch_count) {
    out.mode = SampleMode::kGrid;
    std::vector<std::size_t> cells(cols * rows);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    for (std::size_t i = 0; i < cfg.patch_count; ++i) {
      std::swap(cells[i], cells[i + rng.below(cells.size() - i)]);
      out.patches.push_back({ox + (cells[i] % cols) * m, oy + (cells[i] / cols) * m, 0});
    }
  } else {
    out.mode = SampleMode::kUniform;
    for (std::size_t i = 0; i < cfg.patch_count; ++i) {
      const std::size_t x0 = rng.below(img.width - m + 1);
      const std::size_t y0 = rng.below(img.height - m + 1);
      out.patches.push_back({x0, y0, 0});
    }
  }
  for (Patch& p : out.patches)
    p.ldiv = ldiv(img.data.data() + (p.y0 * img.width + p.x0) * 3, m,
                  img.width * 3);
  return out;
}

std::vector<std::size_t> rank_patches(const std::vector<Patch>& patches) {
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Patch& pa = patches[a];
    const Patch& pb = patches[b];
    if (pa.ldiv != pb.ldiv) return pa.ldiv > pb.ldiv;
    if (pa.x0 != pb.x0) return pa.x0 < pb.x0;
    return pa.y0 < pb.y0;
  });
  return order;
}

ViewPair build_views(const image::ImageU8& img,
                     const std::vector<Patch>& patches,
                     const SmashConfig& cfg) {
  cfg.validate();
  const std::size_t g = cfg.grid(), m = cfg.patch_size, tiles = g * g;
  if (patches.size() < 2 * tiles)
    throw std::invalid_argument("build_views: need at least " +
                                std::to_string(2 * tiles) + " patches, got " +
                                std::to_string(patches.size()));
  const std::vector<std::size_t> order = rank_patches(patches);
  ViewPair v;
  v.rich_idx.assign(order.begin(), order.begin() + tiles);
  v.poor_idx.assign(order.rbegin(), order.rbegin() + tiles);
  auto tile = [&](const std::vector<std::size_t>& idx) {
    image::ImageU8 view = image::ImageU8::blank(cfg.view_size, cfg.view_size);
    for (std::size_t t = 0; t < tiles; ++t) {
      const Patch& p = patches[idx[t]];
      const std::size_t ty = (t / g) * m, tx = (t % g) * m;
      for (std::size_t y = 0; y < m; ++y)
        std::memcpy(view.data.data() + ((ty + y) * view.width + tx) * 3,
                    img.data.data() + ((p.y0 + y) * img.width + p.x0) * 3, m * 3);
    }
    return view;
  };
  v.rich = tile(v.rich_idx);
  v.poor = tile(v.poor_idx);
  return v;
}

SmashResult smash(const image::ImageU8& img, const SmashConfig& cfg, Rng& rng) {
  cfg.validate();
  SmashResult r;
  r.sampled = sample_patches(img, cfg, rng);
  r.views = build_views(img, r.sampled.patches, cfg);
  return r;
}

}  // namespace s2f::smash
