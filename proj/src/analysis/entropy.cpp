// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <stdexcept>

#include "s2f/analysis/analysis.hpp"

namespace s2f::analysis {

std::vector<double> local_entropy(const std::vector<std::uint8_t>& gray, std::size_t h,
                                  std::size_t w, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw std::invalid_argument("entropy window must be odd");
  if (gray.size() != h * w) throw std::invalid_argument("local_entropy: size mismatch");
  if (h < window || w < window) return {};
  const std::size_t n = window * window;
  // c * log2(c) for every possible count.
  std::vector<double> clog(n + 1, 0.0);
  for (std::size_t c = 1; c <= n; ++c) clog[c] = c * std::log2(static_cast<double>(c));
  const double log_n = std::log2(static_cast<double>(n));
  const std::size_t oh = h - window + 1, ow = w - window + 1;
  std::vector<double> out(oh * ow);
  std::array<std::uint32_t, 256> hist{};
  for (std::size_t y = 0; y < oh; ++y) {
    hist.fill(0);
    for (std::size_t dy = 0; dy < window; ++dy)
      for (std::size_t dx = 0; dx < window; ++dx) ++hist[gray[(y + dy) * w + dx]];
    for (std::size_t x = 0;; ++x) {
      double s = 0;
      for (const std::uint32_t c : hist) s += clog[c];
      out[y * ow + x] = log_n - s / static_cast<double>(n);
      if (x + 1 == ow) break;
      for (std::size_t dy = 0; dy < window; ++dy) {
        --hist[gray[(y + dy) * w + x]];
        ++hist[gray[(y + dy) * w + x + window]];
      }
    }
  }
  return out;
}

EntropyStats entropy_stats(const std::vector<std::filesystem::path>& files,
                           std::size_t window, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("entropy_stats: bins must be > 0");
  EntropyStats st;
  st.window = window;
  const double top = std::log2(static_cast<double>(window * window));
  const double width = top / bins;
  st.counts.assign(bins, 0);
  double sum = 0;
  for (const auto& f : files) {
    const image::ImageU8 img = image::load_image(f);
    for (const double e : local_entropy(grayscale_u8(img), img.height, img.width, window)) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, e) / width));
      ++st.counts[b];
      sum += e;
      ++st.samples;
    }
  }
  for (std::size_t b = 0; b < bins; ++b) {
    st.bin_lo.push_back(b * width);
    st.density.push_back(st.samples ? st.counts[b] / (st.samples * width) : 0.0);
  }
  st.mean = st.samples ? sum / st.samples : 0.0;
  return st;
}

}  // namespace s2f::analysis
