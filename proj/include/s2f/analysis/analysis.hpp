// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2f/image/image.hpp"
#include "s2f/smash/smash.hpp"

namespace s2f::analysis {

/// PNG/JPEG files directly inside dir, sorted by path. Throws when none.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// Unweighted RGB mean per pixel, row-major H x W, in [0,255].
std::vector<double> grayscale(const image::ImageU8& img);
/// Same, rounded half up to 8 bits (for histogram-based statistics).
std::vector<std::uint8_t> grayscale_u8(const image::ImageU8& img);

/// Orthonormal 2-D DCT-II of a row-major h x w array (separable).
std::vector<double> dct2(const std::vector<double>& x, std::size_t h, std::size_t w);

/// log(1 + |F|) of the centered 2-D DFT (DC at (h/2, w/2)).
std::vector<double> centered_log_magnitude(const std::vector<double>& x, std::size_t h,
                                           std::size_t w);

struct ImageSpectrum {
  std::string path;
  double mean_log_magnitude = 0;
  double high_freq_ratio = 0;  // share of |F|^2 with normalized radius > 0.5
};

struct SpectraReport {
  std::size_t height = 0, width = 0, images = 0;
  std::vector<double> fft_log_magnitude;  // mean over images
  std::vector<double> dct_abs;            // mean |DCT| over images
  std::vector<ImageSpectrum> per_image;
};

/// Images are center-cropped to the smallest height and width in the set.
SpectraReport spectra(const std::vector<std::filesystem::path>& files);

/// Shannon entropy (bits) of the 256-bin histogram in every full window x
/// window neighbourhood; output (h-window+1) x (w-window+1), row-major.
std::vector<double> local_entropy(const std::vector<std::uint8_t>& gray, std::size_t h,
                                  std::size_t w, std::size_t window);

struct EntropyStats {
  std::size_t window = 0, samples = 0;
  std::vector<double> bin_lo;      // left edges, bins cover [0, log2(window^2)]
  std::vector<std::size_t> counts;
  std::vector<double> density;     // counts / (samples * bin width)
  double mean = 0;
};

EntropyStats entropy_stats(const std::vector<std::filesystem::path>& files,
                           std::size_t window = 9, std::size_t bins = 64);

/// Mean patch ldiv of one image under the smash sampler.
double texture_richness(const image::ImageU8& img, const smash::SmashConfig& cfg,
                        std::uint64_t seed);

/// Silverman's rule 0.9 * min(sd, IQR/1.34) * n^(-1/5), never below `floor`.
double silverman_bandwidth(const std::vector<double>& x, double floor);
/// Gaussian KDE evaluated at t.
double kde_at(const std::vector<double>& x, double bandwidth, double t);

struct KdeResult {
  double bandwidth = 0;
  bool floored = false;
  std::vector<double> samples;
  std::vector<double> grid, density;
};

/// Grid spans [min - 4h, max + 4h]. The bandwidth floor is
/// 1e-3 * max(1, |mean|) so identical inputs still give a proper density.
KdeResult kde(const std::vector<double>& x, std::size_t points = 512);

KdeResult texture_kde(const std::vector<std::filesystem::path>& files,
                      const smash::SmashConfig& cfg, std::uint64_t seed,
                      std::size_t points = 512);

}  // namespace s2f::analysis
