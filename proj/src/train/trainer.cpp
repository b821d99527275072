// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/train/trainer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "s2f/model/checkpoint.hpp"
#include "s2f/tensor/adam.hpp"
#include "s2f/train/metrics.hpp"

namespace s2f::train {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::size_t> epoch_order(const std::vector<Record>& recs,
                                     const RunConfig& cfg, std::size_t epoch) {
  std::vector<std::size_t> idx(recs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(cfg.seed, epoch, 0x5eed));
  if (cfg.balanced) {
    std::vector<std::size_t> by[2];
    for (std::size_t i = 0; i < recs.size(); ++i) by[recs[i].label].push_back(i);
    if (!by[0].empty() && !by[1].empty()) {
      const int minority = by[0].size() < by[1].size() ? 0 : 1;
      const std::size_t deficit = by[1 - minority].size() - by[minority].size();
      for (std::size_t k = 0; k < deficit; ++k)
        idx.push_back(by[minority][rng.below(by[minority].size())]);
    }
  }
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  return idx;
}

using Snapshot = std::vector<std::vector<float>>;

Snapshot snapshot(model::Detector<float>& m) {
  Snapshot s;
  for (auto& nt : m.named_parameters()) s.emplace_back(nt.tensor.data().begin(), nt.tensor.data().end());
  for (auto& nt : m.named_buffers()) s.emplace_back(nt.tensor.data().begin(), nt.tensor.data().end());
  return s;
}

void restore(model::Detector<float>& m, const Snapshot& s) {
  std::size_t k = 0;
  for (auto& nt : m.named_parameters()) std::copy(s[k].begin(), s[k].end(), nt.tensor.ptr()), ++k;
  for (auto& nt : m.named_buffers()) std::copy(s[k].begin(), s[k].end(), nt.tensor.ptr()), ++k;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string();
}

}  // namespace

std::uint64_t init_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, 0x1417); }

TrainResult train(const std::vector<Record>& train_records,
                  const std::vector<Record>& val_records, const RunConfig& cfg,
                  const TrainOptions& opts) {
  cfg.validate();
  if (train_records.empty()) throw std::invalid_argument("train: no training records");
  const auto t_start = Clock::now();
  ImageSource train_src(train_records, cfg.cache_images, cfg.workers);
  std::optional<ImageSource> val_src;
  if (!val_records.empty()) val_src.emplace(val_records, cfg.cache_images, cfg.workers);

  TrainResult res{model::Detector<float>::make(cfg.model, init_seed(cfg)), {}, 0, 0, 0, 0};
  model::Detector<float>& net = res.model;
  net.set_ablation(cfg.ablation);
  std::vector<Tensor<float>> params = net.parameters();
  AdamState<float> adam = AdamState<float>::for_params(params);

  const bool write = !opts.run_dir.empty();
  std::ofstream log;
  if (write) {
    std::filesystem::create_directories(opts.run_dir / "checkpoints");
    std::ofstream(opts.run_dir / "config.ini") << cfg.to_ini();
    log.open(opts.run_dir / "train_log.csv");
    log << "epoch,loss,train_acc,val_acc,val_ap,seconds\n";
  }

  Snapshot best;
  double best_acc = -1, best_ap = -1;
  std::size_t step = 0;
  if (opts.on_step) opts.on_step(0, net);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    const std::vector<std::size_t> order = epoch_order(train_records, cfg, epoch);
    double loss_sum = 0;
    std::size_t batches = 0, hits = 0, seen = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + b0, b1 - b0);
      Batch batch = make_batch(train_src, idx, cfg, true, epoch);
      res.grid_mode += batch.grid_mode;
      res.uniform_mode += batch.uniform_mode;
      Tape<float> tape;
      model::ForwardResult<float> out = net.forward(&tape, batch.rich, batch.poor, true);
      Tensor<float> loss = ops::bce_with_logits(&tape, out.logits, batch.labels);
      if (!std::isfinite(loss[0]))
        throw TrainingDiverged(fmt::format("non-finite loss at epoch {} step {}", epoch, step + 1));
      for (Tensor<float>& p : params) p.zero_grad();
      tape.backward(loss);
      adam_step(params, adam, cfg.optim);
      ++step;
      if (opts.on_step) opts.on_step(step, net);
      loss_sum += loss[0];
      ++batches;
      for (std::size_t k = 0; k < batch.labels.size(); ++k)
        hits += (out.logits[k] >= 0.0f ? 1 : 0) == batch.labels[k];
      seen += batch.labels.size();
    }
    EpochLog e;
    e.epoch = epoch;
    e.loss = loss_sum / batches;
    e.train_acc = static_cast<double>(hits) / seen;
    if (val_src) {
      const EvalReport r = evaluate(net, *val_src, cfg);
      e.val_acc = r.overall.acc;
      e.val_ap = r.overall.ap;
      const double ap = r.overall.ap.value_or(0);
      if (*e.val_acc > best_acc || (*e.val_acc == best_acc && ap > best_ap)) {
        best_acc = *e.val_acc;
        best_ap = ap;
        res.best_epoch = epoch;
        if (cfg.restore_best) best = snapshot(net);
        if (write) model::save_checkpoint(net, opts.run_dir / "checkpoints" / "best.s2fc");
      }
    }
    e.seconds = since(t0);
    res.history.push_back(e);
    if (write) {
      model::save_checkpoint(net, opts.run_dir / "checkpoints" / fmt::format("epoch_{:03d}.s2fc", epoch));
      log << fmt::format("{},{:.6f},{:.6f},{},{},{:.3f}\n", epoch, e.loss, e.train_acc,
                         opt_str(e.val_acc), opt_str(e.val_ap), e.seconds)
          << std::flush;
    }
    if (opts.on_epoch) opts.on_epoch(e);
  }
  if (cfg.restore_best && !best.empty()) restore(net, best);
  res.seconds = since(t_start);
  if (write) {
    nlohmann::json meta;
    meta["config_hash"] = hex64(cfg.hash());
    meta["model_config_hash"] = hex64(cfg.model.hash());
    meta["parameter_count"] = net.parameter_count();
    meta["train_records"] = train_records.size();
    meta["val_records"] = val_records.size();
    meta["best_epoch"] = res.best_epoch;
    meta["patch_sampling"] = {{"grid", res.grid_mode}, {"uniform", res.uniform_mode}};
    meta["seconds"] = res.seconds;
    std::ofstream(opts.run_dir / "run.json") << meta.dump(2) << '\n';
    model::save_checkpoint(net, opts.run_dir / "checkpoints" / "final.s2fc");
  }
  return res;
}

Scores score(model::Detector<float>& model, const ImageSource& src,
             const RunConfig& cfg, const image::DegradeSpec& degrade) {
  Scores s;
  std::vector<std::size_t> idx(src.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t b0 = 0; b0 < idx.size(); b0 += cfg.batch_size) {
    const std::size_t b1 = std::min(idx.size(), b0 + cfg.batch_size);
    Batch batch = make_batch(src, std::span<const std::size_t>(idx.data() + b0, b1 - b0),
                             cfg, false, 0, degrade);
    model::ForwardResult<float> out = model.forward(nullptr, batch.rich, batch.poor, false);
    for (std::size_t k = 0; k < b1 - b0; ++k) {
      s.probs.push_back(ops::sigmoid_scalar<double>(out.logits[k]));
      s.labels.push_back(batch.labels[k]);
      s.sources.push_back(src.record(b0 + k).source);
      const float* f = out.features.ptr() + k * model::kDiscChannels;
      s.features.emplace_back(f, f + model::kDiscChannels);
    }
  }
  return s;
}

EvalReport summarize(const Scores& s, const std::string& variant,
                     const image::DegradeSpec& degrade) {
  auto metrics = [](const std::string& name, const std::vector<double>& p,
                    const std::vector<std::uint8_t>& l) {
    SourceMetrics m;
    m.source = name;
    m.n = p.size();
    m.acc = accuracy(p, l);
    const auto pos = std::count(l.begin(), l.end(), std::uint8_t{1});
    if (pos > 0 && static_cast<std::size_t>(pos) < l.size()) m.ap = average_precision(p, l);
    return m;
  };
  EvalReport r;
  r.variant = variant;
  r.degrade = degrade;
  std::map<std::string, std::pair<std::vector<double>, std::vector<std::uint8_t>>> groups;
  for (std::size_t i = 0; i < s.probs.size(); ++i) {
    groups[s.sources[i]].first.push_back(s.probs[i]);
    groups[s.sources[i]].second.push_back(s.labels[i]);
  }
  double acc_sum = 0, ap_sum = 0;
  std::size_t ap_n = 0;
  for (const auto& [name, pl] : groups) {
    r.per_source.push_back(metrics(name, pl.first, pl.second));
    acc_sum += r.per_source.back().acc;
    if (r.per_source.back().ap) ap_sum += *r.per_source.back().ap, ++ap_n;
  }
  r.overall = metrics("all", s.probs, s.labels);
  r.mean_acc = acc_sum / groups.size();
  if (ap_n) r.mean_ap = ap_sum / ap_n;
  return r;
}

EvalReport evaluate(model::Detector<float>& model, const ImageSource& src,
                    const RunConfig& cfg, const image::DegradeSpec& degrade) {
  return summarize(score(model, src, cfg, degrade), degrade.tag(), degrade);
}

}  // namespace s2f::train
