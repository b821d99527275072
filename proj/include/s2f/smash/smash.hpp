// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2f/image/image.hpp"
#include "s2f/rng.hpp"

// Semantic smashing: cut an image into M x M patches, score each by texture
// complexity, and tile the most and least complex ones into two square views.

namespace s2f::smash {

struct SmashConfig {
  std::size_t patch_size = 32;   // M
  std::size_t patch_count = 192;  // N
  std::size_t view_size = 256;   // M * g

  std::size_t grid() const { return view_size / patch_size; }
  std::size_t tiles() const { return grid() * grid(); }
  void validate() const;
};

enum class SampleMode { kGrid, kUniform };
const char* sample_mode_name(SampleMode m);

struct Patch {
  std::size_t x0 = 0, y0 = 0;  // column, row of the top-left pixel
  std::uint64_t ldiv = 0;
};

/// Sum over channels of absolute differences between neighbours along the
/// horizontal, vertical, diagonal and anti-diagonal directions.
/// `data` is interleaved RGB with `row_stride` bytes per row.
std::uint64_t ldiv(const std::uint8_t* data, std::size_t m,
                   std::size_t row_stride);
std::uint64_t ldiv(const image::ImageU8& patch);  // square patch

struct Sampled {
  std::vector<Patch> patches;
  SampleMode mode = SampleMode::kGrid;
};

/// Grid mode when the image holds at least N non-overlapping cells of an
/// M-grid anchored at a random offset (N distinct cells are drawn); uniform
/// independent origins otherwise.
Sampled sample_patches(const image::ImageU8& img, const SmashConfig& cfg,
                       Rng& rng);

struct ViewPair {
  image::ImageU8 rich, poor;
  std::vector<std::size_t> rich_idx, poor_idx;  // indices into the patch list
};

/// Order of patches by descending ldiv, ties by (x0, y0) ascending.
std::vector<std::size_t> rank_patches(const std::vector<Patch>& patches);

/// Rich view: the first g*g ranked patches tiled in raster order. Poor view:
/// the last g*g, tiled from lowest ldiv upwards.
ViewPair build_views(const image::ImageU8& img,
                     const std::vector<Patch>& patches,
                     const SmashConfig& cfg);

struct SmashResult {
  ViewPair views;
  Sampled sampled;
};

SmashResult smash(const image::ImageU8& img, const SmashConfig& cfg, Rng& rng);

}  // namespace s2f::smash
