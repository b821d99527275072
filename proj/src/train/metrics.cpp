// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace s2f::train {

double accuracy(std::span<const double> probs, std::span<const std::uint8_t> labels) {
  if (probs.empty()) throw std::invalid_argument("accuracy: empty input");
  if (probs.size() != labels.size())
    throw std::invalid_argument("accuracy: length mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    hit += (probs[i] >= 0.5 ? 1 : 0) == labels[i];
  return static_cast<double>(hit) / probs.size();
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("average_precision: length mismatch");
  const std::size_t pos = std::count(labels.begin(), labels.end(), std::uint8_t{1});
  if (pos == 0 || pos == labels.size())
    throw std::invalid_argument("average_precision: needs both positive and negative samples");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0, prev_recall = 0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]];
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / pos;
    ap += (recall - prev_recall) * (static_cast<double>(tp) / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace s2f::train
