// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "s2f/image/image.hpp"
#include "s2f/train/manifest.hpp"

namespace s2f::train {

/// Synthetic two-class fixture. "Real" images are Gaussian-smoothed uniform
/// noise stretched to the full 8-bit range; "fake" images are the same kind
/// of field decimated by 2 and replicated back with nearest neighbour, which
/// leaves 2x2 constant blocks and a periodic spectral replica.
struct ToyConfig {
  std::size_t size = 32;             // even
  std::size_t per_class = 500;
  double sigma = 1.0;
  std::uint64_t seed = 7;
};

image::ImageU8 toy_field(std::size_t size, double sigma, std::uint64_t seed);
/// Nearest 2x decimation followed by nearest 2x replication.
image::ImageU8 nearest_resample_2x(const image::ImageU8& img);

/// Writes real/NNNN.png, fake/NNNN.png and manifest.csv (source "toy") into
/// dir and returns the records in manifest order.
std::vector<Record> write_toy_dataset(const std::filesystem::path& dir,
                                      const ToyConfig& cfg);

}  // namespace s2f::train
