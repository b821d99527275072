// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "s2f/train/config.hpp"
#include "s2f/train/manifest.hpp"

namespace s2f::train {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0: hardware
/// concurrency). Each index is handled exactly once; callers write results to
/// per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

/// Decoded images for a record list, optionally held in memory.
class ImageSource {
 public:
  ImageSource(std::vector<Record> records, bool cache, std::size_t workers);

  std::size_t size() const { return records_.size(); }
  const Record& record(std::size_t i) const { return records_[i]; }
  const std::vector<Record>& records() const { return records_; }
  image::ImageU8 image(std::size_t i) const;

 private:
  std::vector<Record> records_;
  std::vector<image::ImageU8> cache_;
};

struct Sample {
  Tensor<float> rich, poor;  // [1,3,S,S]
  smash::SampleMode mode = smash::SampleMode::kGrid;
};

/// Training path: random crop, augmentation, smash, all driven by `seed`.
Sample prepare_train(const image::ImageU8& img, const RunConfig& cfg,
                     std::uint64_t seed);

/// Evaluation path: degradation on the full image, center crop, smash seeded
/// by the image content and cfg.eval_smash_seed (so identical pixels always
/// give identical views).
Sample prepare_eval(const image::ImageU8& img, const RunConfig& cfg,
                    const image::DegradeSpec& degrade);

struct Batch {
  Tensor<float> rich, poor;  // [B,3,S,S]
  std::vector<std::uint8_t> labels;
  std::size_t grid_mode = 0, uniform_mode = 0;
};

/// Stacks prepared samples for `indices` of `src`. When `train` is set each
/// sample uses seed derive_seed(cfg.seed, epoch, index).
Batch make_batch(const ImageSource& src, std::span<const std::size_t> indices,
                 const RunConfig& cfg, bool train, std::size_t epoch,
                 const image::DegradeSpec& degrade = {});

}  // namespace s2f::train
