// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "s2f/image/image.hpp"
#include "s2f/rng.hpp"

namespace s2f::image {

/// Encode at quality qf and decode back.
ImageU8 jpeg_reencode(const ImageU8& img, int qf);

/// Separable Gaussian, radius ceil(3 sigma), kernel normalized to sum 1,
/// clamp-to-edge borders, round-half-up to 8 bits. sigma == 0 is the identity.
ImageU8 gaussian_blur(const ImageU8& img, double sigma);

/// Normalized 1-D Gaussian taps for offsets -radius..radius.
std::vector<double> gaussian_kernel(double sigma);

/// Bilinear resize by factor r in (0,1]. Output extent round(dim * r); sample
/// positions use half-pixel centers, src = (i + 0.5) / scale - 0.5 with
/// scale = out / in, clamped to the image.
ImageU8 downsample_bilinear(const ImageU8& img, double r);

struct AugmentConfig {
  double trigger_prob = 0.10;
  int jpeg_q_min = 70;
  int jpeg_q_max = 100;
  double blur_sigma_min = 0.0;
  double blur_sigma_max = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// With probability trigger_prob applies exactly one of JPEG (Q uniform in
/// [q_min, q_max]) or blur (sigma uniform in [min, max]), chosen with equal
/// odds; otherwise returns the input unchanged.
ImageU8 augment(const ImageU8& img, const AugmentConfig& cfg, Rng& rng,
                bool* applied = nullptr);

enum class DegradeKind { kNone, kJpeg, kBlur, kDownsample };

struct DegradeSpec {
  DegradeKind kind = DegradeKind::kNone;
  int qf = 95;
  double sigma = 1.0;
  double r = 0.5;

  std::string tag() const;  // "clean", "jpeg", "blur", "downsample"
  void validate() const;

  static DegradeSpec clean() { return {}; }
  static DegradeSpec jpeg(int qf) { return {DegradeKind::kJpeg, qf, 1.0, 0.5}; }
  static DegradeSpec blur(double s) { return {DegradeKind::kBlur, 95, s, 0.5}; }
  static DegradeSpec downsample(double r) {
    return {DegradeKind::kDownsample, 95, 1.0, r};
  }
};

ImageU8 degrade(const ImageU8& img, const DegradeSpec& spec);

/// Crops each side longer than `size` down to `size`: random offset if rng is
/// given, centered otherwise. Sides already <= size are kept.
ImageU8 fit_input(const ImageU8& img, std::size_t size, Rng* rng);

double psnr(const ImageU8& a, const ImageU8& b);

}  // namespace s2f::image
