// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2f/tensor/tensor.hpp"

namespace s2f::image {

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 8-bit interleaved RGB.
struct ImageU8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;  // height * width * 3

  static ImageU8 blank(std::size_t width, std::size_t height,
                       std::uint8_t fill = 0);

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return data[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return data[(y * width + x) * 3 + c];
  }
  bool operator==(const ImageU8&) const = default;
};

/// Decodes PNG or JPEG (sniffed from the magic bytes). Grayscale is promoted
/// to RGB, alpha dropped, 16-bit PNG reduced to 8 bits.
ImageU8 load_image(const std::filesystem::path& path);
ImageU8 decode_image(std::span<const std::uint8_t> bytes,
                     const std::string& name = "<memory>");

void save_png(const ImageU8& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const ImageU8& img);

/// Baseline JPEG at the given quality (libjpeg defaults: 4:2:0 chroma).
std::vector<std::uint8_t> encode_jpeg(const ImageU8& img, int quality);
ImageU8 decode_jpeg(std::span<const std::uint8_t> bytes,
                    const std::string& name = "<memory>");

/// [1,3,H,W] in [0,1], channel order R,G,B.
template <typename T>
Tensor<T> to_tensor(const ImageU8& img);

/// Rectangular crop; throws if the window leaves the image.
ImageU8 crop(const ImageU8& img, std::size_t x0, std::size_t y0,
             std::size_t width, std::size_t height);

}  // namespace s2f::image
