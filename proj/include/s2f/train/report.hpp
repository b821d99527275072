// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "s2f/train/trainer.hpp"

namespace s2f::train {

nlohmann::json to_json(const EvalReport& r);
nlohmann::json to_json(const image::DegradeSpec& d);

/// One row per (variant, source) including the pooled "all" row:
/// variant,source,n,acc,ap (ap empty when undefined).
void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// `base`/<YYYYmmdd-HHMMSS>-<first 8 hex digits of the config hash>, created.
std::filesystem::path make_run_dir(const std::filesystem::path& base,
                                   const RunConfig& cfg);

/// Row-major matrix as comma-separated values with 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const double> values, std::size_t rows,
                      std::size_t cols);
template <typename T>
void write_matrix_csv(const std::filesystem::path& path, std::span<const T> values,
                      std::size_t rows, std::size_t cols) {
  std::vector<double> v(values.begin(), values.end());
  write_matrix_csv(path, std::span<const double>(v), rows, cols);
}

struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;
};

/// Parses a rectangular numeric CSV; throws on ragged rows.
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace s2f::train
