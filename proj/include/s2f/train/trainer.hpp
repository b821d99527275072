// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2f/model/detector.hpp"
#include "s2f/train/config.hpp"
#include "s2f/train/pipeline.hpp"

namespace s2f::train {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0;        // mean over the epoch's minibatches
  double train_acc = 0;   // running, training-mode logits
  std::optional<double> val_acc, val_ap;
  double seconds = 0;
};

struct TrainOptions {
  /// When set, per-epoch and best checkpoints, the config, the epoch log and
  /// run metadata are written here.
  std::filesystem::path run_dir;
  std::function<void(const EpochLog&)> on_epoch;
  /// Called before the first optimizer step (step 0) and after every step.
  std::function<void(std::size_t step, model::Detector<float>&)> on_step;
};

struct TrainResult {
  model::Detector<float> model;
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;  // 0 when no validation data
  std::size_t grid_mode = 0, uniform_mode = 0;  // patch sampling modes seen
  double seconds = 0;
};

/// Seed used for weight initialisation of a run.
std::uint64_t init_seed(const RunConfig& cfg);

TrainResult train(const std::vector<Record>& train_records,
                  const std::vector<Record>& val_records, const RunConfig& cfg,
                  const TrainOptions& opts = {});

struct SourceMetrics {
  std::string source;  // "all" for the pooled row
  std::size_t n = 0;
  double acc = 0;
  std::optional<double> ap;  // absent when only one class is present
};

struct EvalReport {
  std::string variant;  // degradation tag or experiment label
  image::DegradeSpec degrade;
  std::vector<SourceMetrics> per_source;  // sorted by source
  SourceMetrics overall;
  double mean_acc = 0;               // unweighted over sources
  std::optional<double> mean_ap;     // over sources that have an AP
};

struct Scores {
  std::vector<double> probs;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> sources;
  std::vector<std::vector<float>> features;  // pooled [32] per image
};

/// Eval-mode forward over every image, in record order.
Scores score(model::Detector<float>& model, const ImageSource& src,
             const RunConfig& cfg, const image::DegradeSpec& degrade = {});

EvalReport summarize(const Scores& s, const std::string& variant,
                     const image::DegradeSpec& degrade);

EvalReport evaluate(model::Detector<float>& model, const ImageSource& src,
                    const RunConfig& cfg, const image::DegradeSpec& degrade = {});

}  // namespace s2f::train
