// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/image/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace s2f::image {
namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

ImageU8 jpeg_reencode(const ImageU8& img, int qf) {
  return decode_jpeg(encode_jpeg(img, qf), "<reencode>");
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("blur sigma must be >= 0");
  if (sigma == 0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  return k;
}

ImageU8 gaussian_blur(const ImageU8& img, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  if (k.size() == 1) return img;
  const long r = static_cast<long>(k.size() / 2);
  const long w = static_cast<long>(img.width), h = static_cast<long>(img.height);
  std::vector<double> tmp(img.data.size());
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (long t = -r; t <= r; ++t) {
          const long xx = std::clamp(x + t, 0L, w - 1);
          acc += k[t + r] * img.data[(y * w + xx) * 3 + c];
        }
        tmp[(y * w + x) * 3 + c] = acc;
      }
  ImageU8 out = ImageU8::blank(img.width, img.height);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0;
        for (long t = -r; t <= r; ++t) {
          const long yy = std::clamp(y + t, 0L, h - 1);
          acc += k[t + r] * tmp[(yy * w + x) * 3 + c];
        }
        out.data[(y * w + x) * 3 + c] = to_u8(acc);
      }
  return out;
}

ImageU8 downsample_bilinear(const ImageU8& img, double r) {
  if (!(r > 0 && r <= 1)) throw std::invalid_argument("downsample r must be in (0,1]");
  if (r == 1) return img;
  const auto ow = static_cast<std::size_t>(std::floor(img.width * r + 0.5));
  const auto oh = static_cast<std::size_t>(std::floor(img.height * r + 0.5));
  if (ow == 0 || oh == 0)
    throw std::invalid_argument("downsample produces an empty image");
  ImageU8 out = ImageU8::blank(ow, oh);
  auto axis = [](std::size_t i, std::size_t m, std::size_t n, std::size_t& i0,
                 std::size_t& i1, double& f) {
    double src = (i + 0.5) * static_cast<double>(n) / m - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<std::size_t>(std::floor(src));
    i1 = std::min(i0 + 1, n - 1);
    f = src - i0;
  };
  for (std::size_t y = 0; y < oh; ++y) {
    std::size_t y0, y1;
    double fy;
    axis(y, oh, img.height, y0, y1, fy);
    for (std::size_t x = 0; x < ow; ++x) {
      std::size_t x0, x1;
      double fx;
      axis(x, ow, img.width, x0, x1, fx);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = (1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
        const double bot = (1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
        out.at(y, x, c) = to_u8((1 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

void AugmentConfig::validate() const {
  if (!(trigger_prob >= 0 && trigger_prob <= 1))
    throw std::invalid_argument("augment trigger_prob must be in [0,1]");
  if (jpeg_q_min < 1 || jpeg_q_max > 100 || jpeg_q_min > jpeg_q_max)
    throw std::invalid_argument("augment jpeg quality range invalid");
  if (blur_sigma_min < 0 || blur_sigma_min > blur_sigma_max)
    throw std::invalid_argument("augment blur sigma range invalid");
}

ImageU8 augment(const ImageU8& img, const AugmentConfig& cfg, Rng& rng,
                bool* applied) {
  const bool fire = rng.bernoulli(cfg.trigger_prob);
  if (applied) *applied = fire;
  if (!fire) return img;
  if (rng.below(2) == 0) {
    const int span = cfg.jpeg_q_max - cfg.jpeg_q_min + 1;
    const int q = cfg.jpeg_q_min + static_cast<int>(rng.below(span));
    return jpeg_reencode(img, q);
  }
  return gaussian_blur(img, rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max));
}

std::string DegradeSpec::tag() const {
  switch (kind) {
    case DegradeKind::kNone: return "clean";
    case DegradeKind::kJpeg: return "jpeg";
    case DegradeKind::kBlur: return "blur";
    case DegradeKind::kDownsample: return "downsample";
  }
  return "unknown";
}

void DegradeSpec::validate() const {
  if (qf < 1 || qf > 100) throw std::invalid_argument("qf must be in [1,100]");
  if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
  if (!(r > 0 && r <= 1)) throw std::invalid_argument("r must be in (0,1]");
}

ImageU8 degrade(const ImageU8& img, const DegradeSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case DegradeKind::kNone: return img;
    case DegradeKind::kJpeg: return jpeg_reencode(img, spec.qf);
    case DegradeKind::kBlur: return gaussian_blur(img, spec.sigma);
    case DegradeKind::kDownsample: return downsample_bilinear(img, spec.r);
  }
  return img;
}

ImageU8 fit_input(const ImageU8& img, std::size_t size, Rng* rng) {
  if (size == 0 || (img.width <= size && img.height <= size)) return img;
  const std::size_t cw = std::min(size, img.width);
  const std::size_t ch = std::min(size, img.height);
  const std::size_t mx = img.width - cw, my = img.height - ch;
  std::size_t x0 = mx / 2, y0 = my / 2;
  if (rng) {
    x0 = static_cast<std::size_t>(rng->below(mx + 1));
    y0 = static_cast<std::size_t>(rng->below(my + 1));
  }
  return crop(img, x0, y0, cw, ch);
}

double psnr(const ImageU8& a, const ImageU8& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("psnr: size mismatch");
  double se = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    se += d * d;
  }
  if (se == 0) return std::numeric_limits<double>::infinity();
  const double mse = se / a.data.size();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace s2f::image
