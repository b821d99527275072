// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

namespace s2f::train {

/// Fraction of (prob >= 0.5) == label. Throws on empty or mismatched input.
double accuracy(std::span<const double> probs, std::span<const std::uint8_t> labels);

/// Step-interpolated area under the precision-recall curve with label 1 as
/// the positive class: sum_k (R_k - R_{k-1}) * P_k over descending score
/// thresholds, equal scores forming one threshold. Needs both classes.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels);

}  // namespace s2f::train
