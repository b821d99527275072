// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2f/model/detector.hpp"

// Binary layout, little-endian:
//   "S2FNETCK"  u32 version  u32 scalar_bytes  u64 config_hash
//   u32 len + model config text     u32 len + ablation name
//   u32 record count, then per record:
//     u32 len + name  u8 kind (0 param, 1 buffer)  u32 rank  u64 dims[rank]
//     numel * scalar_bytes payload
//   u32 CRC-32 of every preceding byte
// A JSON sidecar (<path>.json) lists the same metadata for humans.

namespace s2f::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorMeta {
  std::string name;
  Shape shape;
  bool buffer = false;
};

struct CheckpointInfo {
  std::uint32_t version = 0;
  std::uint32_t scalar_bytes = 0;
  std::uint64_t config_hash = 0;
  ModelConfig config;
  Ablation ablation = Ablation::kFull;
  std::vector<TensorMeta> tensors;
  std::size_t parameter_count = 0;
};

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(Detector<T>& model);

/// Writes the binary file and its JSON sidecar.
template <typename T>
void save_checkpoint(Detector<T>& model, const std::filesystem::path& path);

/// Rebuilds a model from the configuration stored in the file.
template <typename T>
Detector<T> load_checkpoint(const std::filesystem::path& path);

/// Loads into an existing model; throws if the stored config hash differs
/// from the model's.
template <typename T>
void load_into(Detector<T>& model, const std::filesystem::path& path);

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path);

}  // namespace s2f::model
