// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "s2f/analysis/analysis.hpp"
#include "s2f/lfa/lfa.hpp"
#include "s2f/tensor/fft.hpp"

namespace s2f::analysis {
namespace {

// Orthonormal DCT-II basis, row k holds s(k) cos(pi (2n+1) k / 2N).
std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> m(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (std::size_t i = 0; i < n; ++i)
      m[k * n + i] = s * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
  }
  return m;
}

image::ImageU8 center_crop(const image::ImageU8& img, std::size_t h, std::size_t w) {
  return image::crop(img, (img.width - w) / 2, (img.height - h) / 2, w, h);
}

}  // namespace

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(e.path());
  }
  if (out.empty()) throw std::runtime_error("no PNG/JPEG images in " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> grayscale(const image::ImageU8& img) {
  std::vector<double> g(img.width * img.height);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (static_cast<double>(img.data[3 * i]) + img.data[3 * i + 1] + img.data[3 * i + 2]) / 3.0;
  return g;
}

std::vector<std::uint8_t> grayscale_u8(const image::ImageU8& img) {
  std::vector<std::uint8_t> g(img.width * img.height);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const unsigned s = img.data[3 * i] + img.data[3 * i + 1] + img.data[3 * i + 2];
    g[i] = static_cast<std::uint8_t>((2 * s + 3) / 6);  // round(s / 3), halves up
  }
  return g;
}

std::vector<double> dct2(const std::vector<double>& x, std::size_t h, std::size_t w) {
  if (x.size() != h * w) throw std::invalid_argument("dct2: size mismatch");
  const std::vector<double> ch = dct_matrix(h), cw = dct_matrix(w);
  std::vector<double> rows(h * w, 0.0), out(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t v = 0; v < w; ++v) {
      double acc = 0;
      for (std::size_t i = 0; i < w; ++i) acc += cw[v * w + i] * x[y * w + i];
      rows[y * w + v] = acc;
    }
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v) {
      double acc = 0;
      for (std::size_t i = 0; i < h; ++i) acc += ch[u * h + i] * rows[i * w + v];
      out[u * w + v] = acc;
    }
  return out;
}

std::vector<double> centered_log_magnitude(const std::vector<double>& x, std::size_t h,
                                           std::size_t w) {
  Tensor<double> t = Tensor<double>::from({h, w}, x);
  const ComplexTensor<double> z = fft::fftshift<double>(nullptr, fft::fft2<double>(nullptr, t));
  std::vector<double> out(h * w);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log1p(std::hypot(z.re()[i], z.im()[i]));
  return out;
}

SpectraReport spectra(const std::vector<std::filesystem::path>& files) {
  if (files.empty()) throw std::invalid_argument("spectra: no images");
  std::vector<image::ImageU8> imgs;
  std::size_t h = SIZE_MAX, w = SIZE_MAX;
  for (const auto& f : files) {
    imgs.push_back(image::load_image(f));
    h = std::min(h, imgs.back().height);
    w = std::min(w, imgs.back().width);
  }
  SpectraReport r;
  r.height = h;
  r.width = w;
  r.images = imgs.size();
  r.fft_log_magnitude.assign(h * w, 0.0);
  r.dct_abs.assign(h * w, 0.0);
  const Tensor<double> dist = lfa::distance_matrix<double>(h, w);
  for (std::size_t k = 0; k < imgs.size(); ++k) {
    const std::vector<double> g = grayscale(center_crop(imgs[k], h, w));
    const std::vector<double> lm = centered_log_magnitude(g, h, w);
    const std::vector<double> d = dct2(g, h, w);
    ImageSpectrum s;
    s.path = files[k].string();
    double total = 0, high = 0;
    for (std::size_t i = 0; i < h * w; ++i) {
      r.fft_log_magnitude[i] += lm[i];
      r.dct_abs[i] += std::abs(d[i]);
      s.mean_log_magnitude += lm[i];
      const double e = std::expm1(lm[i]) * std::expm1(lm[i]);
      total += e;
      if (dist[i] > 0.5) high += e;
    }
    s.mean_log_magnitude /= static_cast<double>(h * w);
    s.high_freq_ratio = total > 0 ? high / total : 0.0;
    r.per_image.push_back(s);
  }
  for (double& v : r.fft_log_magnitude) v /= static_cast<double>(imgs.size());
  for (double& v : r.dct_abs) v /= static_cast<double>(imgs.size());
  return r;
}

}  // namespace s2f::analysis
