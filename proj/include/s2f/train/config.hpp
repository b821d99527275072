// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2f/image/degrade.hpp"
#include "s2f/model/detector.hpp"
#include "s2f/smash/smash.hpp"
#include "s2f/tensor/adam.hpp"

namespace s2f::train {

/// Everything that determines a run. Text form is INI:
///
///   [smash]   patch_size patch_count view_size input_size
///   [lfa]     groups alpha energy_norm mask_mode
///   [optim]   lr beta1 beta2 eps batch_size
///   [augment] trigger_prob jpeg_q_min jpeg_q_max blur_sigma_min blur_sigma_max
///   [train]   epochs seed ablation val_fraction balanced workers cache_images
///             restore_best
///   [eval]    smash_seed
struct RunConfig {
  smash::SmashConfig smash;
  std::size_t input_size = 256;  // crop applied before smashing
  model::ModelConfig model;
  AdamConfig optim;
  std::size_t batch_size = 32;
  image::AugmentConfig augment;
  model::Ablation ablation = model::Ablation::kFull;
  std::uint64_t seed = 0;
  std::size_t epochs = 20;
  double val_fraction = 0.10;
  bool balanced = false;
  std::size_t workers = 0;  // 0: hardware concurrency
  bool cache_images = true;
  bool restore_best = true;
  std::uint64_t eval_smash_seed = 1234;

  /// Checks cross-field consistency (view size shared by smash and model,
  /// group divisibility, ranges).
  void validate() const;

  /// Canonical INI text; parsing it back yields an equal config.
  std::string to_ini() const;
  /// Hash of the canonical text (run directory naming).
  std::uint64_t hash() const;
};

/// Applies `section.key=value` to cfg; unknown keys throw.
void apply_override(RunConfig& cfg, const std::string& assignment);

RunConfig parse_config(const std::string& ini_text);
RunConfig load_config(const std::filesystem::path& path);

std::string hex64(std::uint64_t v);

}  // namespace s2f::train
