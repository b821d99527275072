// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/report.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace s2f::train {
namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const SourceMetrics& m) {
  return {{"source", m.source}, {"n", m.n}, {"acc", m.acc}, {"ap", opt(m.ap)}};
}

}  // namespace

nlohmann::json to_json(const image::DegradeSpec& d) {
  nlohmann::json j = {{"kind", d.tag()}};
  switch (d.kind) {
    case image::DegradeKind::kJpeg: j["qf"] = d.qf; break;
    case image::DegradeKind::kBlur: j["sigma"] = d.sigma; break;
    case image::DegradeKind::kDownsample: j["r"] = d.r; break;
    case image::DegradeKind::kNone: break;
  }
  return j;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const SourceMetrics& m : r.per_source) per.push_back(to_json(m));
  return {{"variant", r.variant},      {"degradation", to_json(r.degrade)},
          {"per_source", per},         {"overall", to_json(r.overall)},
          {"mean_acc", r.mean_acc},    {"mean_ap", opt(r.mean_ap)}};
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "variant,source,n,acc,ap\n";
  auto row = [&](const std::string& v, const SourceMetrics& m) {
    out << v << ',' << m.source << ',' << m.n << ',' << fmt::format("{:.6f}", m.acc) << ','
        << (m.ap ? fmt::format("{:.6f}", *m.ap) : "") << '\n';
  };
  for (const EvalReport& r : reports) {
    for (const SourceMetrics& m : r.per_source) row(r.variant, m);
    row(r.variant, r.overall);
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::filesystem::path make_run_dir(const std::filesystem::path& base,
                                   const RunConfig& cfg) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  const std::string stamp = fmt::format("{:%Y%m%d-%H%M%S}", fmt::localtime(now));
  std::filesystem::path dir = base / (stamp + "-" + hex64(cfg.hash()).substr(0, 8));
  for (int k = 1; std::filesystem::exists(dir); ++k)
    dir = base / fmt::format("{}-{}-{}", stamp, hex64(cfg.hash()).substr(0, 8), k);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const double> values, std::size_t rows,
                      std::size_t cols) {
  if (values.size() != rows * cols)
    throw std::invalid_argument("write_matrix_csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) line += ',';
      line += fmt::format("{:.17g}", values[r * cols + c]);
    }
    out << line << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Matrix m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      m.values.push_back(std::stod(cell));
      ++n;
    }
    if (m.rows == 0) m.cols = n;
    else if (n != m.cols) throw std::runtime_error(path.string() + ": ragged row");
    ++m.rows;
  }
  return m;
}

}  // namespace s2f::train
