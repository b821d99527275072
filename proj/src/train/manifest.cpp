// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "s2f/rng.hpp"

namespace s2f::train {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  for (const char c : line) {
    if (c == ',') out.emplace_back();
    else if (c != '\r') out.back() += c;
  }
  return out;
}

}  // namespace

std::vector<Record> load_manifest(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot open manifest: " + csv.string());
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"path", "label", "source"})
    throw std::runtime_error(csv.string() + ": header must be 'path,label,source'");
  const std::filesystem::path base = csv.parent_path();
  std::vector<Record> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv(line);
    const std::string where = csv.string() + ":" + std::to_string(lineno);
    if (f.size() != 3) throw std::runtime_error(where + ": expected 3 fields");
    Record r;
    r.path = f[0];
    if (r.path.is_relative()) r.path = base / r.path;
    if (f[1] == "real" || f[1] == "0") r.label = 0;
    else if (f[1] == "fake" || f[1] == "1") r.label = 1;
    else throw std::runtime_error(where + ": label must be real or fake, got '" + f[1] + "'");
    r.source = f[2];
    out.push_back(std::move(r));
  }
  if (out.empty()) throw std::runtime_error(csv.string() + ": manifest has no records");
  return out;
}

void save_manifest(const std::vector<Record>& records,
                   const std::filesystem::path& csv) {
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write manifest: " + csv.string());
  out << "path,label,source\n";
  for (const Record& r : records)
    out << r.path.string() << ',' << (r.label ? "fake" : "real") << ',' << r.source << '\n';
}

Split split_validation(const std::vector<Record>& records, double val_fraction,
                       std::uint64_t seed) {
  Split s;
  for (const Record& r : records) {
    const double u = static_cast<double>(derive_seed(seed, fnv1a(r.path.string())) >> 11) * 0x1.0p-53;
    (u < val_fraction ? s.val : s.train).push_back(r);
  }
  if (s.train.empty()) throw std::runtime_error("validation split left no training records");
  if (val_fraction > 0 && s.val.empty())
    throw std::runtime_error("validation split left no validation records");
  return s;
}

}  // namespace s2f::train
