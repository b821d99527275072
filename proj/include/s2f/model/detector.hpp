// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "s2f/lfa/lfa.hpp"
#include "s2f/rng.hpp"
#include "s2f/srm/srm.hpp"

namespace s2f::model {

enum class Ablation { kFull, kNoLfa, kNoLow, kNoHigh };
Ablation parse_ablation(const std::string& s);
const char* ablation_name(Ablation a);
lfa::LfaBypass bypass_for(Ablation a);

struct ModelConfig {
  std::size_t view_size = 256;
  std::size_t groups = 8;
  double alpha = 0.5;
  bool energy_norm = true;
  lfa::MaskMode mask_mode = lfa::MaskMode::kPerGroup;

  lfa::LfaConfig lfa_config() const;
  /// Canonical key=value text of the architecture; its hash guards
  /// checkpoint compatibility.
  std::string to_text() const;
  std::uint64_t hash() const;
  static ModelConfig from_text(const std::string& text);
};

template <typename T>
struct ConvBn {
  Tensor<T> weight;  // [out,in,3,3]
  ops::BatchNorm2d<T> bn;
};

inline constexpr std::size_t kDiscConvs = 10;
inline constexpr std::size_t kFusedChannels = 64;
inline constexpr std::size_t kDiscChannels = 32;

/// Conv-BN-ReLU stack 64->32, 32->32 x3, pool, x2, pool, x2, pool, x2, then
/// global average pooling and a 32->1 linear head.
template <typename T>
struct Discriminator {
  std::array<ConvBn<T>, kDiscConvs> convs;
  Tensor<T> fc_weight;  // [32,1]
  Tensor<T> fc_bias;    // [1]

  static Discriminator make(Rng& rng);
  /// Returns logits [B,1]; stores the pooled [B,32] features if requested.
  Tensor<T> forward(Tape<T>* tape, const Tensor<T>& fused, bool training,
                    Tensor<T>* features = nullptr);
};

/// Channel concatenation, rich first.
template <typename T>
Tensor<T> fuse(Tape<T>* tape, const Tensor<T>& rich, const Tensor<T>& poor);

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;       // [B,1]
  Tensor<T> features;     // [B,32] pooled, pre-head
  Tensor<T> energy_rich;  // [B,G] (undefined when that branch is bypassed)
  Tensor<T> energy_poor;
};

template <typename T>
class Detector {
 public:
  static Detector make(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  Ablation ablation() const { return ablation_; }
  void set_ablation(Ablation a) { ablation_ = a; }

  /// rich, poor: [B,3,S,S] views in [0,1].
  ForwardResult<T> forward(Tape<T>* tape, const Tensor<T>& rich,
                           const Tensor<T>& poor, bool training);

  /// Trainable tensors in a fixed order with stable names.
  std::vector<NamedTensor<T>> named_parameters();
  /// BN running statistics.
  std::vector<NamedTensor<T>> named_buffers();
  std::vector<Tensor<T>> parameters();
  std::size_t parameter_count();

  lfa::LfaState<T>& lfa() { return lfa_; }
  const lfa::LfaState<T>& lfa() const { return lfa_; }

 private:
  ModelConfig cfg_;
  Ablation ablation_ = Ablation::kFull;
  srm::SrmEncoder<T> encoder_;
  lfa::LfaState<T> lfa_;
  Discriminator<T> disc_;
};

}  // namespace s2f::model
