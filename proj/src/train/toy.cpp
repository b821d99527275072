// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/toy.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "s2f/image/degrade.hpp"
#include "s2f/rng.hpp"

namespace s2f::train {

image::ImageU8 toy_field(std::size_t size, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  image::ImageU8 noise = image::ImageU8::blank(size, size);
  for (auto& v : noise.data) v = static_cast<std::uint8_t>(rng.below(256));
  image::ImageU8 img = sigma > 0 ? image::gaussian_blur(noise, sigma) : noise;
  // Stretch each channel to [0,255] so the field keeps strong local contrast.
  for (std::size_t c = 0; c < 3; ++c) {
    int lo = 255, hi = 0;
    for (std::size_t i = c; i < img.data.size(); i += 3) {
      lo = std::min<int>(lo, img.data[i]);
      hi = std::max<int>(hi, img.data[i]);
    }
    if (hi <= lo) continue;
    for (std::size_t i = c; i < img.data.size(); i += 3)
      img.data[i] = static_cast<std::uint8_t>(
          std::lround(255.0 * (img.data[i] - lo) / static_cast<double>(hi - lo)));
  }
  return img;
}

image::ImageU8 nearest_resample_2x(const image::ImageU8& img) {
  if (img.width % 2 || img.height % 2)
    throw std::invalid_argument("nearest_resample_2x: odd image size");
  image::ImageU8 out = image::ImageU8::blank(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        out.data[(y * img.width + x) * 3 + c] =
            img.data[((y & ~std::size_t{1}) * img.width + (x & ~std::size_t{1})) * 3 + c];
  return out;
}

std::vector<Record> write_toy_dataset(const std::filesystem::path& dir, const ToyConfig& cfg) {
  if (cfg.size == 0 || cfg.size % 2) throw std::invalid_argument("toy size must be even");
  std::filesystem::create_directories(dir / "real");
  std::filesystem::create_directories(dir / "fake");
  std::vector<Record> recs;
  for (std::size_t i = 0; i < cfg.per_class; ++i) {
    const auto real_path = dir / "real" / fmt::format("{:04}.png", i);
    image::save_png(toy_field(cfg.size, cfg.sigma, derive_seed(cfg.seed, 0, i)), real_path);
    recs.push_back({real_path, 0, "toy"});
  }
  for (std::size_t i = 0; i < cfg.per_class; ++i) {
    const auto fake_path = dir / "fake" / fmt::format("{:04}.png", i);
    image::save_png(
        nearest_resample_2x(toy_field(cfg.size, cfg.sigma, derive_seed(cfg.seed, 1, i))),
        fake_path);
    recs.push_back({fake_path, 1, "toy"});
  }
  save_manifest(recs, dir / "manifest.csv");
  return recs;
}

}  // namespace s2f::train
