// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace s2f::train {

struct Record {
  std::filesystem::path path;  // resolved against the manifest directory
  std::uint8_t label = 0;      // 0 real, 1 fake
  std::string source;
};

/// CSV with header `path,label,source`; label is real|fake (or 0|1).
/// Relative paths are resolved against the manifest's directory. Fields may
/// not contain commas.
std::vector<Record> load_manifest(const std::filesystem::path& csv);
void save_manifest(const std::vector<Record>& records,
                   const std::filesystem::path& csv);

struct Split {
  std::vector<Record> train, val;
};

/// Deterministic split: a record goes to validation when the seeded hash of
/// its path string falls below `val_fraction`. Throws if a side is empty.
Split split_validation(const std::vector<Record>& records, double val_fraction,
                       std::uint64_t seed);

}  // namespace s2f::train
