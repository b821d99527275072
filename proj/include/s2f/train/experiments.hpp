// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "s2f/train/trainer.hpp"

namespace s2f::train {

struct ExperimentData {
  std::vector<Record> train, val, eval;
};

struct AblationRow {
  model::Ablation variant = model::Ablation::kFull;
  EvalReport report;
  double train_acc = 0;   // last epoch, running
  double delta_acc = 0;   // report.overall.acc minus the full model's
  bool lfa_unchanged = false;  // all four LFA tensors equal their init bitwise
};

/// Trains and evaluates full, no_lfa, no_low and no_high with otherwise
/// identical configs. Writes ablation.csv / ablation.json (and per-variant
/// run dirs) under out_dir when it is non-empty.
std::vector<AblationRow> run_ablation(const ExperimentData& data, const RunConfig& base,
                                      const std::filesystem::path& out_dir,
                                      const TrainOptions& hooks = {});

struct SweepRow {
  std::size_t groups = 0;
  EvalReport report;
  double train_acc = 0;
  double step0_max_abs_diff = 0;  // learned-minus-init mask before any step
};

/// Trains one model per group count. Under out_dir/G<g>/ writes mask
/// difference matrices before the first step (suffix _step0) and after
/// training (suffix _final), plus sweep.csv at the top level.
std::vector<SweepRow> run_group_sweep(const ExperimentData& data, const RunConfig& base,
                                      const std::vector<std::size_t>& groups,
                                      const std::filesystem::path& out_dir,
                                      const TrainOptions& hooks = {});

/// Writes <prefix>{high,low}_sigmoid[_g<k>].csv and
/// <prefix>{high,low}_diff[_g<k>].csv (learned minus initial mask) into dir.
/// Per-group masks get one file per group. Returns the largest |diff|.
double write_mask_csvs(model::Detector<float>& model, const std::filesystem::path& dir,
                       const std::string& prefix = "", const std::string& suffix = "",
                       bool with_sigmoid = true);

/// clean, JPEG QF 95, blur sigma 1, bilinear downsample r 0.5.
std::vector<image::DegradeSpec> standard_degradations();

/// Evaluates every degradation; the degradation is applied to the full image
/// before cropping and smashing.
std::vector<EvalReport> run_robustness(model::Detector<float>& model, const ImageSource& src,
                                       const RunConfig& cfg,
                                       const std::vector<image::DegradeSpec>& specs =
                                           standard_degradations());

}  // namespace s2f::train
