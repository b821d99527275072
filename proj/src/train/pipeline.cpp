// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>

namespace s2f::train {

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

ImageSource::ImageSource(std::vector<Record> records, bool cache,
                         std::size_t workers)
    : records_(std::move(records)) {
  if (!cache) return;
  cache_.resize(records_.size());
  parallel_for(records_.size(), workers,
               [&](std::size_t i) { cache_[i] = image::load_image(records_[i].path); });
}

image::ImageU8 ImageSource::image(std::size_t i) const {
  if (!cache_.empty()) return cache_[i];
  return image::load_image(records_[i].path);
}

namespace {

Sample finish(const image::ImageU8& img, const RunConfig& cfg, Rng& rng) {
  const smash::SmashResult r = smash::smash(img, cfg.smash, rng);
  return {image::to_tensor<float>(r.views.rich), image::to_tensor<float>(r.views.poor),
          r.sampled.mode};
}

std::uint64_t content_hash(const image::ImageU8& img) {
  std::uint64_t h = fnv1a(std::string_view(
      reinterpret_cast<const char*>(img.data.data()), img.data.size()));
  return derive_seed(h, img.width, img.height);
}

}  // namespace

Sample prepare_train(const image::ImageU8& img, const RunConfig& cfg,
                     std::uint64_t seed) {
  Rng rng(seed);
  image::ImageU8 x = image::fit_input(img, cfg.input_size, &rng);
  x = image::augment(x, cfg.augment, rng);
  return finish(x, cfg, rng);
}

Sample prepare_eval(const image::ImageU8& img, const RunConfig& cfg,
                    const image::DegradeSpec& degrade) {
  image::ImageU8 x = image::degrade(img, degrade);
  x = image::fit_input(x, cfg.input_size, nullptr);
  Rng rng(derive_seed(cfg.eval_smash_seed, content_hash(x)));
  return finish(x, cfg, rng);
}

Batch make_batch(const ImageSource& src, std::span<const std::size_t> indices,
                 const RunConfig& cfg, bool train, std::size_t epoch,
                 const image::DegradeSpec& degrade) {
  const std::size_t nb = indices.size(), s = cfg.smash.view_size;
  std::vector<Sample> samples(nb);
  parallel_for(nb, cfg.workers, [&](std::size_t k) {
    const std::size_t i = indices[k];
    const image::ImageU8 img = src.image(i);
    samples[k] = train ? prepare_train(img, cfg, derive_seed(cfg.seed, epoch, i))
                       : prepare_eval(img, cfg, degrade);
  });
  Batch b;
  b.rich = Tensor<float>::zeros({nb, 3, s, s});
  b.poor = Tensor<float>::zeros({nb, 3, s, s});
  const std::size_t per = 3 * s * s;
  for (std::size_t k = 0; k < nb; ++k) {
    std::memcpy(b.rich.ptr() + k * per, samples[k].rich.ptr(), per * sizeof(float));
    std::memcpy(b.poor.ptr() + k * per, samples[k].poor.ptr(), per * sizeof(float));
    b.labels.push_back(src.record(indices[k]).label);
    (samples[k].mode == smash::SampleMode::kGrid ? b.grid_mode : b.uniform_mode)++;
  }
  return b;
}

}  // namespace s2f::train
