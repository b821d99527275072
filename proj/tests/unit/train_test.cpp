// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "oracles.hpp"
#include "s2f/train/config.hpp"
#include "s2f/train/manifest.hpp"
#include "s2f/train/metrics.hpp"
#include "s2f/train/report.hpp"
#include "s2f/train/trainer.hpp"

namespace s2f::train {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "s2f_train_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

using Labels = std::vector<std::uint8_t>;
using Probs = std::vector<double>;

TEST(Accuracy, ThresholdAtHalfCountsAsFake) {
  EXPECT_DOUBLE_EQ(accuracy(Probs{0.5, 0.49, 0.9, 0.1}, Labels{1, 0, 1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(Probs{0.5, 0.49}, Labels{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(accuracy(Probs{0.7, 0.2, 0.6}, Labels{1, 1, 0}), 1.0 / 3.0);
  EXPECT_THROW(accuracy(Probs{}, Labels{}), std::invalid_argument);
  EXPECT_THROW(accuracy(Probs{0.1}, Labels{0, 1}), std::invalid_argument);
}

TEST(AveragePrecision, HandExample) {
  // Ranking: 0.9(+) 0.8(-) 0.7(+) 0.1(-) -> 1/2 * 1 + 1/2 * 2/3.
  EXPECT_NEAR(average_precision(Probs{0.9, 0.8, 0.7, 0.1}, Labels{1, 0, 1, 0}), 5.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(average_precision(Probs{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0}), 1.0);
  // A full tie collapses to the positive rate.
  EXPECT_DOUBLE_EQ(average_precision(Probs{0.5, 0.5, 0.5, 0.5}, Labels{1, 0, 0, 0}), 0.25);
}

TEST(AveragePrecision, MatchesBruteForceOnRandomInputs) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(199);
    Probs s(n);
    Labels y(n);
    // Coarse scores so ties are common.
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? std::floor(rng.uniform() * 8) / 8 : rng.uniform();
      y[i] = rng.bernoulli(0.4);
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(average_precision(s, y), oracle::average_precision(s, y), 1e-12) << "trial " << trial;
  }
}

TEST(AveragePrecision, Errors) {
  EXPECT_THROW(average_precision(Probs{0.1, 0.2}, Labels{1, 1}), std::invalid_argument);
  EXPECT_THROW(average_precision(Probs{0.1, 0.2}, Labels{0, 0}), std::invalid_argument);
  EXPECT_THROW(average_precision(Probs{0.1}, Labels{0, 1}), std::invalid_argument);
}

TEST(Config, DefaultsRoundTripThroughIni) {
  const RunConfig d;
  EXPECT_NO_THROW(d.validate());
  const RunConfig p = parse_config(d.to_ini());
  EXPECT_EQ(p.to_ini(), d.to_ini());
  EXPECT_EQ(p.hash(), d.hash());
  EXPECT_EQ(d.smash.patch_size, 32u);
  EXPECT_EQ(d.smash.patch_count, 192u);
  EXPECT_EQ(d.model.groups, 8u);
  EXPECT_DOUBLE_EQ(d.optim.lr, 1e-4);
  EXPECT_EQ(d.batch_size, 32u);
}

TEST(Config, OverridesAndPartialFiles) {
  RunConfig c = parse_config("[smash]\nview_size = 64\n[optim]\nlr = 0.002\n");
  EXPECT_EQ(c.smash.view_size, 64u);
  EXPECT_EQ(c.model.view_size, 64u);
  EXPECT_DOUBLE_EQ(c.optim.lr, 0.002);
  EXPECT_EQ(c.batch_size, 32u);
  apply_override(c, "lfa.groups=16");
  apply_override(c, " train.ablation = no_low ");
  apply_override(c, "lfa.energy_norm=false");
  EXPECT_EQ(c.model.groups, 16u);
  EXPECT_EQ(c.ablation, model::Ablation::kNoLow);
  EXPECT_FALSE(c.model.energy_norm);
  const RunConfig r = parse_config(c.to_ini());
  EXPECT_EQ(r.to_ini(), c.to_ini());
  EXPECT_NE(r.hash(), RunConfig{}.hash());
}

TEST(Config, RejectsBadInput) {
  RunConfig c;
  EXPECT_THROW(apply_override(c, "nokey"), std::invalid_argument);
  EXPECT_THROW(apply_override(c, "smash.bogus=1"), std::invalid_argument);
  EXPECT_THROW(apply_override(c, "optim.lr=fast"), std::invalid_argument);
  EXPECT_THROW(apply_override(c, "smash.patch_size=-3"), std::invalid_argument);
  EXPECT_THROW(apply_override(c, "train.balanced=maybe"), std::invalid_argument);
  EXPECT_THROW(parse_config("[nosuch]\nx = 1\n"), std::invalid_argument);
  RunConfig v;
  v.batch_size = 0;
  EXPECT_THROW(v.validate(), std::invalid_argument);
  v = RunConfig{};
  v.val_fraction = 1.0;
  EXPECT_THROW(v.validate(), std::invalid_argument);
  v = RunConfig{};
  v.model.view_size = 128;
  EXPECT_THROW(v.validate(), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/x.ini"), std::runtime_error);
}

TEST(Manifest, SaveLoadRoundTripResolvesRelativePaths) {
  const fs::path d = scratch("manifest");
  {
    std::ofstream out(d / "m.csv");
    out << "path,label,source\nreal/a.png,real,toy\nfake/b.png,1,gan\n/abs/c.png,fake,sd\n";
  }
  const std::vector<Record> r = load_manifest(d / "m.csv");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].path, d / "real/a.png");
  EXPECT_EQ(r[0].label, 0);
  EXPECT_EQ(r[1].label, 1);
  EXPECT_EQ(r[1].source, "gan");
  EXPECT_EQ(r[2].path, fs::path("/abs/c.png"));
  save_manifest(r, d / "n.csv");
  const std::vector<Record> s = load_manifest(d / "n.csv");
  ASSERT_EQ(s.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s[i].path, r[i].path);
    EXPECT_EQ(s[i].label, r[i].label);
    EXPECT_EQ(s[i].source, r[i].source);
  }
}

TEST(Manifest, RejectsMalformedFiles) {
  const fs::path d = scratch("manifest_bad");
  auto write = [&](const std::string& body) {
    std::ofstream(d / "m.csv") << body;
    return d / "m.csv";
  };
  EXPECT_THROW(load_manifest(write("file,label,source\na,real,x\n")), std::runtime_error);
  EXPECT_THROW(load_manifest(write("path,label,source\na,maybe,x\n")), std::runtime_error);
  EXPECT_THROW(load_manifest(write("path,label,source\na,real\n")), std::runtime_error);
  EXPECT_THROW(load_manifest(write("path,label,source\n")), std::runtime_error);
  EXPECT_THROW(load_manifest(d / "missing.csv"), std::runtime_error);
}

TEST(Split, DeterministicDisjointAndNearFraction) {
  std::vector<Record> recs;
  for (int i = 0; i < 2000; ++i) recs.push_back({fs::path("img" + std::to_string(i) + ".png"), std::uint8_t(i % 2), "x"});
  const Split a = split_validation(recs, 0.1, 3), b = split_validation(recs, 0.1, 3);
  const Split c = split_validation(recs, 0.1, 4);
  EXPECT_EQ(a.train.size() + a.val.size(), recs.size());
  ASSERT_EQ(a.val.size(), b.val.size());
  for (std::size_t i = 0; i < a.val.size(); ++i) EXPECT_EQ(a.val[i].path, b.val[i].path);
  bool differs = a.val.size() != c.val.size();
  for (std::size_t i = 0; !differs && i < a.val.size(); ++i) differs = a.val[i].path != c.val[i].path;
  EXPECT_TRUE(differs);
  EXPECT_NEAR(static_cast<double>(a.val.size()) / recs.size(), 0.1, 0.025);
  // Membership depends only on the path, so reordering does not move records.
  std::vector<Record> rev(recs.rbegin(), recs.rend());
  const Split r = split_validation(rev, 0.1, 3);
  EXPECT_EQ(r.val.size(), a.val.size());
  EXPECT_EQ(split_validation(recs, 0.0, 3).val.size(), 0u);
}

TEST(Report, MatrixCsvRoundTrip) {
  const fs::path d = scratch("matrix");
  Rng rng(5);
  std::vector<double> v = oracle::random_values(7 * 5, rng, -1e3, 1e3);
  v[3] = 1e-300;
  v[4] = -0.0;
  write_matrix_csv(d / "m.csv", std::span<const double>(v), 7, 5);
  const Matrix m = read_matrix_csv(d / "m.csv");
  EXPECT_EQ(m.rows, 7u);
  EXPECT_EQ(m.cols, 5u);
  ASSERT_EQ(m.values.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(m.values[i], v[i]);
  EXPECT_THROW(write_matrix_csv(d / "x.csv", std::span<const double>(v), 6, 5), std::invalid_argument);
}

TEST(Report, SummarizeAndJsonSchema) {
  Scores s;
  s.probs = {0.9, 0.2, 0.8, 0.6, 0.1, 0.3};
  s.labels = {1, 0, 1, 0, 1, 1};
  s.sources = {"a", "a", "a", "a", "b", "b"};
  const EvalReport r = summarize(s, "clean", {});
  ASSERT_EQ(r.per_source.size(), 2u);
  EXPECT_EQ(r.per_source[0].source, "a");
  EXPECT_DOUBLE_EQ(r.per_source[0].acc, 0.75);
  EXPECT_DOUBLE_EQ(r.per_source[1].acc, 0.0);
  EXPECT_FALSE(r.per_source[1].ap.has_value());
  EXPECT_EQ(r.overall.n, 6u);
  EXPECT_DOUBLE_EQ(r.overall.acc, 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.mean_acc, 0.375);
  ASSERT_TRUE(r.mean_ap.has_value());
  EXPECT_DOUBLE_EQ(*r.mean_ap, *r.per_source[0].ap);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j["variant"], "clean");
  EXPECT_EQ(j["degradation"]["kind"], "clean");
  EXPECT_TRUE(j["per_source"][1]["ap"].is_null());
  EXPECT_EQ(j["overall"]["source"], "all");
  image::DegradeSpec jp;
  jp.kind = image::DegradeKind::kJpeg;
  jp.qf = 95;
  EXPECT_EQ(to_json(jp)["qf"], 95);
}

TEST(Report, RunDirIsNamedByConfigHash) {
  const fs::path d = scratch("runs");
  RunConfig c;
  const fs::path a = make_run_dir(d, c);
  EXPECT_TRUE(fs::is_directory(a));
  EXPECT_NE(a.filename().string().find(hex64(c.hash()).substr(0, 8)), std::string::npos) << a;
}

}  // namespace
}  // namespace s2f::train
