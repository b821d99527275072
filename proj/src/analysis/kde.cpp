// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "s2f/analysis/analysis.hpp"

namespace s2f::analysis {
namespace {

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& s, double q) {
  const double pos = q * (s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - lo) * (s[hi] - s[lo]);
}

}  // namespace

double texture_richness(const image::ImageU8& img, const smash::SmashConfig& cfg,
                        std::uint64_t seed) {
  Rng rng(seed);
  const smash::Sampled s = smash::sample_patches(img, cfg, rng);
  double total = 0;
  for (const smash::Patch& p : s.patches) total += static_cast<double>(p.ldiv);
  return total / s.patches.size();
}

double silverman_bandwidth(const std::vector<double>& x, double floor) {
  if (x.empty()) throw std::invalid_argument("bandwidth: no samples");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0;
  for (const double v : x) var += (v - mean) * (v - mean);
  const double sd = x.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  const double iqr = quantile(s, 0.75) - quantile(s, 0.25);
  double spread = sd;
  if (iqr > 0) spread = std::min(sd, iqr / 1.34);
  return std::max(0.9 * spread * std::pow(n, -0.2), floor);
}

double kde_at(const std::vector<double>& x, double bandwidth, double t) {
  const double norm = 1.0 / (x.size() * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0;
  for (const double v : x) {
    const double z = (t - v) / bandwidth;
    acc += std::exp(-0.5 * z * z);
  }
  return acc * norm;
}

KdeResult kde(const std::vector<double>& x, std::size_t points) {
  if (x.empty()) throw std::invalid_argument("kde: no samples");
  if (points < 2) throw std::invalid_argument("kde: need at least 2 grid points");
  KdeResult r;
  r.samples = x;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double floor = 1e-3 * std::max(1.0, std::abs(mean));
  r.bandwidth = silverman_bandwidth(x, floor);
  r.floored = r.bandwidth == floor;
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn - 4 * r.bandwidth, hi = *mx + 4 * r.bandwidth;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = lo + (hi - lo) * i / (points - 1);
    r.grid.push_back(t);
    r.density.push_back(kde_at(x, r.bandwidth, t));
  }
  return r;
}

KdeResult texture_kde(const std::vector<std::filesystem::path>& files,
                      const smash::SmashConfig& cfg, std::uint64_t seed, std::size_t points) {
  std::vector<double> rich;
  for (const auto& f : files) {
    const image::ImageU8 img = image::load_image(f);
    const std::uint64_t h = fnv1a(std::string_view(
        reinterpret_cast<const char*>(img.data.data()), img.data.size()));
    rich.push_back(texture_richness(img, cfg, derive_seed(seed, h)));
  }
  return kde(rich, points);
}

}  // namespace s2f::analysis
