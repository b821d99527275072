// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "s2f/train/report.hpp"

namespace s2f::train {
namespace {

bool lfa_at_init(model::Detector<float>& m) {
  const lfa::LfaState<float>& s = m.lfa();
  auto same = [](const Tensor<float>& a, const Tensor<float>& b) {
    return a.numel() == b.numel() &&
           std::memcmp(a.ptr(), b.ptr(), a.numel() * sizeof(float)) == 0;
  };
  const Tensor<float> ones = Tensor<float>::full({s.cfg.groups}, 1.0f);
  return same(s.high.mask, s.initial_high()) && same(s.low.mask, s.initial_low()) &&
         same(s.high.weights, ones) && same(s.low.weights, ones);
}

double mask_max_abs_diff(model::Detector<float>& m) {
  const lfa::LfaState<float>& s = m.lfa();
  const Tensor<float> ih = s.initial_high(), il = s.initial_low();
  double out = 0;
  for (std::size_t i = 0; i < ih.numel(); ++i)
    out = std::max({out, std::abs(double(s.high.mask[i]) - ih[i]),
                    std::abs(double(s.low.mask[i]) - il[i])});
  return out;
}

}  // namespace

double write_mask_csvs(model::Detector<float>& model, const std::filesystem::path& dir,
                       const std::string& prefix, const std::string& suffix,
                       bool with_sigmoid) {
  std::filesystem::create_directories(dir);
  const lfa::LfaState<float>& s = model.lfa();
  const std::size_t h = s.cfg.height, w = s.cfg.width, hw = h * w;
  double max_abs = 0;
  auto dump = [&](const char* branch, const Tensor<float>& mask, const Tensor<float>& init) {
    const std::size_t copies = mask.numel() / hw;
    for (std::size_t g = 0; g < copies; ++g) {
      const std::string tag = copies > 1 ? fmt::format("_g{}", g) : std::string();
      std::vector<double> diff(hw), sig(hw);
      for (std::size_t i = 0; i < hw; ++i) {
        const double m = mask[g * hw + i];
        diff[i] = m - static_cast<double>(init[g * hw + i]);
        sig[i] = 1.0 / (1.0 + std::exp(-m));
        max_abs = std::max(max_abs, std::abs(diff[i]));
      }
      write_matrix_csv(dir / fmt::format("{}{}_diff{}{}.csv", prefix, branch, tag, suffix),
                       std::span<const double>(diff), h, w);
      if (with_sigmoid)
        write_matrix_csv(dir / fmt::format("{}{}_sigmoid{}{}.csv", prefix, branch, tag, suffix),
                         std::span<const double>(sig), h, w);
    }
  };
  dump("high", s.high.mask, s.initial_high());
  dump("low", s.low.mask, s.initial_low());
  return max_abs;
}

std::vector<AblationRow> run_ablation(const ExperimentData& data, const RunConfig& base,
                                      const std::filesystem::path& out_dir,
                                      const TrainOptions& hooks) {
  const model::Ablation variants[] = {model::Ablation::kFull, model::Ablation::kNoLfa,
                                      model::Ablation::kNoLow, model::Ablation::kNoHigh};
  const ImageSource eval_src(data.eval, base.cache_images, base.workers);
  std::vector<AblationRow> rows;
  for (const model::Ablation v : variants) {
    RunConfig cfg = base;
    cfg.ablation = v;
    TrainOptions opts = hooks;
    if (!out_dir.empty()) opts.run_dir = out_dir / model::ablation_name(v);
    TrainResult tr = train(data.train, data.val, cfg, opts);
    AblationRow row;
    row.variant = v;
    row.report = evaluate(tr.model, eval_src, cfg);
    row.report.variant = model::ablation_name(v);
    row.train_acc = tr.history.empty() ? 0 : tr.history.back().train_acc;
    row.lfa_unchanged = lfa_at_init(tr.model);
    rows.push_back(std::move(row));
  }
  for (AblationRow& r : rows) r.delta_acc = r.report.overall.acc - rows.front().report.overall.acc;
  if (!out_dir.empty()) {
    std::ofstream csv(out_dir / "ablation.csv");
    csv << "variant,acc,ap,delta_acc,train_acc,lfa_unchanged\n";
    nlohmann::json j = nlohmann::json::array();
    std::vector<EvalReport> reports;
    for (const AblationRow& r : rows) {
      csv << fmt::format("{},{:.6f},{},{:.6f},{:.6f},{}\n", r.report.variant, r.report.overall.acc,
                         r.report.overall.ap ? fmt::format("{:.6f}", *r.report.overall.ap) : "",
                         r.delta_acc, r.train_acc, r.lfa_unchanged);
      nlohmann::json e = to_json(r.report);
      e["delta_acc"] = r.delta_acc;
      e["train_acc"] = r.train_acc;
      e["lfa_unchanged"] = r.lfa_unchanged;
      j.push_back(e);
      reports.push_back(r.report);
    }
    write_json(j, out_dir / "ablation.json");
    write_reports_csv(reports, out_dir / "ablation_per_source.csv");
  }
  return rows;
}

std::vector<SweepRow> run_group_sweep(const ExperimentData& data, const RunConfig& base,
                                      const std::vector<std::size_t>& groups,
                                      const std::filesystem::path& out_dir,
                                      const TrainOptions& hooks) {
  for (const std::size_t g : groups)
    if (g == 0 || srm::kEncoderChannels % g != 0)
      throw std::invalid_argument(fmt::format("group count {} does not divide {} channels", g,
                                              srm::kEncoderChannels));
  const ImageSource eval_src(data.eval, base.cache_images, base.workers);
  std::vector<SweepRow> rows;
  for (const std::size_t g : groups) {
    RunConfig cfg = base;
    cfg.model.groups = g;
    const std::filesystem::path dir =
        out_dir.empty() ? std::filesystem::path() : out_dir / fmt::format("G{}", g);
    SweepRow row;
    row.groups = g;
    TrainOptions opts = hooks;
    if (!dir.empty()) opts.run_dir = dir;
    opts.on_step = [&, user = hooks.on_step](std::size_t step, model::Detector<float>& m) {
      if (step == 0) {
        row.step0_max_abs_diff = mask_max_abs_diff(m);
        if (!dir.empty()) write_mask_csvs(m, dir, "mask_", "_step0", false);
      }
      if (user) user(step, m);
    };
    TrainResult tr = train(data.train, data.val, cfg, opts);
    if (!dir.empty()) write_mask_csvs(tr.model, dir, "mask_", "_final", true);
    row.report = evaluate(tr.model, eval_src, cfg);
    row.report.variant = fmt::format("G{}", g);
    row.train_acc = tr.history.empty() ? 0 : tr.history.back().train_acc;
    rows.push_back(std::move(row));
  }
  if (!out_dir.empty()) {
    std::ofstream csv(out_dir / "sweep.csv");
    csv << "groups,channels_per_group,acc,ap,train_acc,step0_max_abs_diff\n";
    for (const SweepRow& r : rows)
      csv << fmt::format("{},{},{:.6f},{},{:.6f},{}\n", r.groups, srm::kEncoderChannels / r.groups,
                         r.report.overall.acc,
                         r.report.overall.ap ? fmt::format("{:.6f}", *r.report.overall.ap) : "",
                         r.train_acc, r.step0_max_abs_diff);
  }
  return rows;
}

std::vector<image::DegradeSpec> standard_degradations() {
  return {image::DegradeSpec::clean(), image::DegradeSpec::jpeg(95),
          image::DegradeSpec::blur(1.0), image::DegradeSpec::downsample(0.5)};
}

std::vector<EvalReport> run_robustness(model::Detector<float>& model, const ImageSource& src,
                                       const RunConfig& cfg,
                                       const std::vector<image::DegradeSpec>& specs) {
  std::vector<EvalReport> out;
  for (const image::DegradeSpec& d : specs) out.push_back(evaluate(model, src, cfg, d));
  return out;
}

}  // namespace s2f::train
