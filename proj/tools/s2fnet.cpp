// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "s2f/analysis/analysis.hpp"
#include "s2f/image/degrade.hpp"
#include "s2f/model/checkpoint.hpp"
#include "s2f/smash/smash.hpp"
#include "s2f/srm/srm.hpp"
#include "s2f/train/config.hpp"
#include "s2f/train/experiments.hpp"
#include "s2f/train/manifest.hpp"
#include "s2f/train/report.hpp"
#include "s2f/train/toy.hpp"
#include "s2f/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace s2f;

namespace {

constexpr const char* kConfigEnv = "S2FNET_CONFIG";

// Options shared by every command that needs a run configuration.
struct ConfigOpts {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", path,
                    fmt::format("INI run config (default: ${} if set)", kConfigEnv));
    cmd->add_option("-s,--set", overrides, "Override, e.g. --set optim.lr=1e-3 (repeatable)");
  }

  // Explicit flag, then the environment, then config.ini of the checkpoint's
  // run directory, then built-in defaults.
  train::RunConfig resolve(const fs::path& checkpoint = {}) const {
    std::string p = path;
    if (p.empty())
      if (const char* env = std::getenv(kConfigEnv)) p = env;
    if (p.empty() && !checkpoint.empty()) {
      for (const fs::path& d : {checkpoint.parent_path(), checkpoint.parent_path().parent_path()})
        if (fs::exists(d / "config.ini")) {
          p = (d / "config.ini").string();
          break;
        }
    }
    train::RunConfig cfg = p.empty() ? train::RunConfig{} : train::load_config(p);
    for (const std::string& o : overrides) train::apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
};

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw std::runtime_error("no such file: " + p.string());
}

// Loads a checkpoint and aligns the run config's architecture with it.
model::Detector<float> load_model(const fs::path& ckpt, train::RunConfig& cfg) {
  require_file(ckpt);
  model::Detector<float> m = model::load_checkpoint<float>(ckpt);
  cfg.model = m.config();
  cfg.smash.view_size = m.config().view_size;
  cfg.validate();
  return m;
}

std::optional<double> opt(const std::optional<double>& v) { return v; }

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

void print_report(const train::EvalReport& r) {
  fmt::print("{:<12} {:>6} {:>8} {:>8}\n", "source", "n", "acc", "ap");
  for (const train::SourceMetrics& s : r.per_source)
    fmt::print("{:<12} {:>6} {:>8.4f} {:>8}\n", s.source, s.n, s.acc, fmt_opt(s.ap));
  fmt::print("{:<12} {:>6} {:>8.4f} {:>8}\n", "all", r.overall.n, r.overall.acc,
             fmt_opt(r.overall.ap));
  fmt::print("mean_acc={:.4f} mean_ap={}\n", r.mean_acc, fmt_opt(opt(r.mean_ap)));
}

image::DegradeSpec parse_degrade(const std::string& s) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  image::DegradeSpec d;
  if (kind == "clean") {
    d = image::DegradeSpec::clean();
  } else if (kind == "jpeg") {
    d = image::DegradeSpec::jpeg(arg.empty() ? 95 : std::stoi(arg));
  } else if (kind == "blur") {
    d = image::DegradeSpec::blur(arg.empty() ? 1.0 : std::stod(arg));
  } else if (kind == "down" || kind == "downsample") {
    d = image::DegradeSpec::downsample(arg.empty() ? 0.5 : std::stod(arg));
  } else {
    throw std::invalid_argument("unknown degradation '" + s + "' (clean, jpeg:Q, blur:S, down:R)");
  }
  d.validate();
  return d;
}

std::vector<std::size_t> parse_groups(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stoul(tok));
  return out;
}

train::ExperimentData experiment_data(const std::string& manifest, const std::string& eval_manifest,
                                      const train::RunConfig& cfg) {
  require_file(manifest);
  train::Split sp = train::split_validation(train::load_manifest(manifest), cfg.val_fraction, cfg.seed);
  train::ExperimentData d{std::move(sp.train), std::move(sp.val), {}};
  if (!eval_manifest.empty()) {
    require_file(eval_manifest);
    d.eval = train::load_manifest(eval_manifest);
  } else {
    d.eval = d.val;
  }
  if (d.eval.empty()) throw std::runtime_error("no evaluation records; pass --eval-manifest");
  return d;
}

train::TrainOptions progress_hooks(bool quiet) {
  train::TrainOptions o;
  if (!quiet)
    o.on_epoch = [](const train::EpochLog& e) {
      fmt::print("epoch {:>3} loss {:.4f} train_acc {:.4f} val_acc {} val_ap {} ({:.1f}s)\n",
                 e.epoch, e.loss, e.train_acc, fmt_opt(e.val_acc), fmt_opt(e.val_ap), e.seconds);
      std::fflush(stdout);
    };
  return o;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"s2fnet: spatial/frequency AIGC image detector"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  ConfigOpts copts;
  std::string manifest, val_manifest, eval_manifest, checkpoint, out, image_path, dir, json_out;
  std::string groups = "8,16,32";
  std::vector<std::string> degrades;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> smash_seed;
  std::size_t window = 9, bins = 64, points = 512;
  bool quiet = false;
  train::ToyConfig toy;

  auto* train_cmd = app.add_subcommand("train", "Train a detector from a manifest");
  copts.attach(train_cmd);
  train_cmd->add_option("-m,--manifest", manifest, "Training manifest CSV (path,label,source)")->required();
  train_cmd->add_option("--val-manifest", val_manifest,
                        "Validation manifest (default: hash split of --manifest)");
  train_cmd->add_option("-o,--out", out, "Base directory for the run directory")->default_val("runs");
  train_cmd->add_flag("-q,--quiet", quiet, "No per-epoch progress");

  auto* eval_cmd = app.add_subcommand("eval", "Per-source ACC/AP of a checkpoint");
  copts.attach(eval_cmd);
  eval_cmd->add_option("-m,--manifest", manifest, "Evaluation manifest")->required();
  eval_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--degrade", degrades, "Degradation (clean, jpeg:Q, blur:S, down:R)");
  eval_cmd->add_option("-o,--out", out, "Directory for report.json/report.csv");

  auto* analyze_cmd = app.add_subcommand("analyze", "Score one image");
  copts.attach(analyze_cmd);
  analyze_cmd->add_option("image", image_path, "PNG or JPEG image")->required();
  analyze_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  analyze_cmd->add_option("--smash-seed", smash_seed, "Fixed patch-sampling seed");
  analyze_cmd->add_option("--json", json_out, "Write the result as JSON ('-' for stdout)");

  auto* smash_cmd = app.add_subcommand("smash", "Dump texture-rich/poor views of an image");
  copts.attach(smash_cmd);
  smash_cmd->add_option("image", image_path, "PNG or JPEG image")->required();
  smash_cmd->add_option("-o,--out", out, "Output directory")->required();
  smash_cmd->add_option("--seed", seed, "Patch-sampling seed")->default_val(0);

  auto* srm_cmd = app.add_subcommand("srm-dump", "Write the 30 SRM kernels as CSV");
  srm_cmd->add_option("-o,--out", out, "Output CSV")->required();

  auto* mask_cmd = app.add_subcommand("mask-viz", "Export sigmoid(M) and M - M_init matrices");
  mask_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  mask_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate full/no_lfa/no_low/no_high");
  copts.attach(ablate_cmd);
  ablate_cmd->add_option("-m,--manifest", manifest, "Training manifest")->required();
  ablate_cmd->add_option("--eval-manifest", eval_manifest, "Held-out manifest (default: validation split)");
  ablate_cmd->add_option("-o,--out", out, "Output directory")->required();
  ablate_cmd->add_flag("-q,--quiet", quiet, "No per-epoch progress");

  auto* sweep_cmd = app.add_subcommand("sweep-groups", "Train once per LFA group count");
  copts.attach(sweep_cmd);
  sweep_cmd->add_option("-m,--manifest", manifest, "Training manifest")->required();
  sweep_cmd->add_option("--eval-manifest", eval_manifest, "Held-out manifest (default: validation split)");
  sweep_cmd->add_option("-g,--groups", groups, "Comma-separated group counts")->default_val("8,16,32");
  sweep_cmd->add_option("-o,--out", out, "Output directory")->required();
  sweep_cmd->add_flag("-q,--quiet", quiet, "No per-epoch progress");

  auto* robust_cmd = app.add_subcommand("robustness", "Evaluate under JPEG, blur and downsampling");
  copts.attach(robust_cmd);
  robust_cmd->add_option("-m,--manifest", manifest, "Evaluation manifest")->required();
  robust_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  robust_cmd->add_option("--degrade", degrades,
                         "Degradations (default: clean jpeg:95 blur:1 down:0.5)");
  robust_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* spectra_cmd = app.add_subcommand("spectra", "Mean centered-FFT and DCT maps of a directory");
  spectra_cmd->add_option("dir", dir, "Image directory")->required();
  spectra_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* entropy_cmd = app.add_subcommand("entropy-stats", "Local-entropy histogram of a directory");
  entropy_cmd->add_option("dir", dir, "Image directory")->required();
  entropy_cmd->add_option("-w,--window", window, "Odd window size")->default_val(9);
  entropy_cmd->add_option("--bins", bins, "Histogram bins")->default_val(64);
  entropy_cmd->add_option("-o,--out", out, "Output CSV")->required();

  auto* kde_cmd = app.add_subcommand("texture-kde", "KDE of per-image texture richness");
  copts.attach(kde_cmd);
  kde_cmd->add_option("dir", dir, "Image directory")->required();
  kde_cmd->add_option("--points", points, "Grid points")->default_val(512);
  kde_cmd->add_option("--seed", seed, "Patch-sampling seed")->default_val(0);
  kde_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* feat_cmd = app.add_subcommand("export-features", "Pooled 32-d features per image as CSV");
  copts.attach(feat_cmd);
  feat_cmd->add_option("-m,--manifest", manifest, "Manifest")->required();
  feat_cmd->add_option("-k,--checkpoint", checkpoint, "Checkpoint file")->required();
  feat_cmd->add_option("-o,--out", out, "Output CSV")->required();

  auto* toy_cmd = app.add_subcommand("toy-data", "Write the synthetic real/fake fixture");
  toy_cmd->add_option("-o,--out", out, "Output directory")->required();
  toy_cmd->add_option("--size", toy.size, "Image side (even)")->default_val(32);
  toy_cmd->add_option("--per-class", toy.per_class, "Images per class")->default_val(500);
  toy_cmd->add_option("--sigma", toy.sigma, "Smoothing sigma")->default_val(1.0);
  toy_cmd->add_option("--seed", toy.seed, "Seed")->default_val(7);

  if (argc > 1 && argv[1][0] != '-') {
    bool known = false;
    for (const CLI::App* sub : app.get_subcommands({}))
      known = known || sub->get_name() == argv[1];
    if (!known) {
      std::cerr << "s2fnet: error: unknown subcommand '" << argv[1] << "'\n" << app.help();
      return 2;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "s2fnet: error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*train_cmd) {
      train::RunConfig cfg = copts.resolve();
      require_file(manifest);
      std::vector<train::Record> tr = train::load_manifest(manifest), val;
      if (!val_manifest.empty()) {
        require_file(val_manifest);
        val = train::load_manifest(val_manifest);
      } else {
        train::Split sp = train::split_validation(tr, cfg.val_fraction, cfg.seed);
        tr = std::move(sp.train);
        val = std::move(sp.val);
      }
      train::TrainOptions o = progress_hooks(quiet);
      o.run_dir = train::make_run_dir(out, cfg);
      train::TrainResult r = train::train(tr, val, cfg, o);
      fmt::print("run_dir={}\nbest_epoch={}\nparameters={}\nseconds={:.1f}\n", o.run_dir.string(),
                 r.best_epoch, r.model.parameter_count(), r.seconds);
    } else if (*eval_cmd) {
      train::RunConfig cfg = copts.resolve(checkpoint);
      model::Detector<float> m = load_model(checkpoint, cfg);
      require_file(manifest);
      const train::ImageSource src(train::load_manifest(manifest), cfg.cache_images, cfg.workers);
      if (degrades.empty()) degrades.push_back("clean");
      std::vector<train::EvalReport> reports;
      for (const std::string& d : degrades) {
        reports.push_back(train::evaluate(m, src, cfg, parse_degrade(d)));
        fmt::print("[{}]\n", reports.back().variant);
        print_report(reports.back());
      }
      if (!out.empty()) {
        fs::create_directories(out);
        json j = json::array();
        for (const auto& r : reports) j.push_back(train::to_json(r));
        train::write_json(j, fs::path(out) / "report.json");
        train::write_reports_csv(reports, fs::path(out) / "report.csv");
      }
    } else if (*analyze_cmd) {
      train::RunConfig cfg = copts.resolve(checkpoint);
      model::Detector<float> m = load_model(checkpoint, cfg);
      if (smash_seed) cfg.eval_smash_seed = *smash_seed;
      require_file(image_path);
      const image::ImageU8 img = image::load_image(image_path);
      const train::Sample s = train::prepare_eval(img, cfg, {});
      const model::ForwardResult<float> r = m.forward(nullptr, s.rich, s.poor, false);
      const double prob = 1.0 / (1.0 + std::exp(-static_cast<double>(r.logits[0])));
      auto energies = [](const Tensor<float>& e) {
        std::vector<double> v;
        if (e.defined())
          for (std::size_t i = 0; i < e.numel(); ++i) v.push_back(e[i]);
        return v;
      };
      json j = {{"image", image_path},
                {"prob_fake", prob},
                {"label", prob >= 0.5 ? "fake" : "real"},
                {"smash_seed", cfg.eval_smash_seed},
                {"sample_mode", smash::sample_mode_name(s.mode)},
                {"ablation", model::ablation_name(m.ablation())},
                {"energy_high", energies(r.energy_rich)},
                {"energy_low", energies(r.energy_poor)}};
      if (json_out == "-") {
        std::cout << j.dump(2) << "\n";
      } else {
        fmt::print("prob_fake={:.6f}\nlabel={}\n", prob, j["label"].get<std::string>());
        fmt::print("energy_high={}\nenergy_low={}\n", j["energy_high"].dump(), j["energy_low"].dump());
        if (!json_out.empty()) write_text(json_out, j.dump(2) + "\n");
      }
    } else if (*smash_cmd) {
      train::RunConfig cfg = copts.resolve();
      require_file(image_path);
      const image::ImageU8 img = image::fit_input(image::load_image(image_path), cfg.input_size, nullptr);
      Rng rng(seed);
      const smash::SmashResult r = smash::smash(img, cfg.smash, rng);
      fs::create_directories(out);
      image::save_png(r.views.rich, fs::path(out) / "rich.png");
      image::save_png(r.views.poor, fs::path(out) / "poor.png");
      const std::vector<std::size_t> rank = smash::rank_patches(r.sampled.patches);
      std::vector<std::size_t> rank_of(rank.size());
      for (std::size_t i = 0; i < rank.size(); ++i) rank_of[rank[i]] = i;
      json patches = json::array();
      for (std::size_t i = 0; i < r.sampled.patches.size(); ++i) {
        const smash::Patch& p = r.sampled.patches[i];
        patches.push_back({{"x0", p.x0}, {"y0", p.y0}, {"ldiv", p.ldiv}, {"rank", rank_of[i]}});
      }
      json j = {{"image", image_path},
                {"seed", seed},
                {"patch_size", cfg.smash.patch_size},
                {"patch_count", cfg.smash.patch_count},
                {"view_size", cfg.smash.view_size},
                {"mode", smash::sample_mode_name(r.sampled.mode)},
                {"rich", r.views.rich_idx},
                {"poor", r.views.poor_idx},
                {"patches", patches}};
      write_text(fs::path(out) / "patches.json", j.dump(2) + "\n");
      fmt::print("wrote {}\n", out);
    } else if (*srm_cmd) {
      std::string text = "index,base,direction,row,c0,c1,c2,c3,c4\n";
      const auto& bank = srm::filter_bank();
      for (std::size_t k = 0; k < bank.size(); ++k)
        for (std::size_t r = 0; r < 5; ++r)
          text += fmt::format("{},{},{},{},{}\n", k, bank[k].base, bank[k].direction, r,
                              fmt::join(bank[k].k[r], ","));
      write_text(out, text);
    } else if (*mask_cmd) {
      require_file(checkpoint);
      model::Detector<float> m = model::load_checkpoint<float>(checkpoint);
      const double d = train::write_mask_csvs(m, out);
      fmt::print("max_abs_diff={:.6g}\n", d);
    } else if (*ablate_cmd) {
      train::RunConfig cfg = copts.resolve();
      const train::ExperimentData data = experiment_data(manifest, eval_manifest, cfg);
      const auto rows = train::run_ablation(data, cfg, out, progress_hooks(quiet));
      fmt::print("{:<8} {:>8} {:>8} {:>9} {:>14}\n", "variant", "acc", "ap", "delta_acc", "lfa_unchanged");
      for (const auto& r : rows)
        fmt::print("{:<8} {:>8.4f} {:>8} {:>+9.4f} {:>14}\n", r.report.variant, r.report.overall.acc,
                   fmt_opt(r.report.overall.ap), r.delta_acc, r.lfa_unchanged);
    } else if (*sweep_cmd) {
      train::RunConfig cfg = copts.resolve();
      const train::ExperimentData data = experiment_data(manifest, eval_manifest, cfg);
      const auto rows = train::run_group_sweep(data, cfg, parse_groups(groups), out, progress_hooks(quiet));
      fmt::print("{:>6} {:>8} {:>8} {:>18}\n", "groups", "acc", "ap", "step0_max_abs_diff");
      for (const auto& r : rows)
        fmt::print("{:>6} {:>8.4f} {:>8} {:>18.3g}\n", r.groups, r.report.overall.acc,
                   fmt_opt(r.report.overall.ap), r.step0_max_abs_diff);
    } else if (*robust_cmd) {
      train::RunConfig cfg = copts.resolve(checkpoint);
      model::Detector<float> m = load_model(checkpoint, cfg);
      require_file(manifest);
      const train::ImageSource src(train::load_manifest(manifest), cfg.cache_images, cfg.workers);
      std::vector<image::DegradeSpec> specs;
      for (const std::string& d : degrades) specs.push_back(parse_degrade(d));
      if (specs.empty()) specs = train::standard_degradations();
      const auto reports = train::run_robustness(m, src, cfg, specs);
      fs::create_directories(out);
      json j = json::array();
      for (const auto& r : reports) {
        j.push_back(train::to_json(r));
        fmt::print("[{}]\n", r.variant);
        print_report(r);
      }
      train::write_json(j, fs::path(out) / "robustness.json");
      train::write_reports_csv(reports, fs::path(out) / "robustness.csv");
    } else if (*spectra_cmd) {
      const analysis::SpectraReport r = analysis::spectra(analysis::list_images(dir));
      fs::create_directories(out);
      train::write_matrix_csv(fs::path(out) / "fft_log_magnitude.csv",
                              std::span<const double>(r.fft_log_magnitude), r.height, r.width);
      train::write_matrix_csv(fs::path(out) / "dct_abs.csv", std::span<const double>(r.dct_abs),
                              r.height, r.width);
      std::string text = "path,mean_log_magnitude,high_freq_ratio\n";
      for (const auto& s : r.per_image)
        text += fmt::format("{},{:.17g},{:.17g}\n", s.path, s.mean_log_magnitude, s.high_freq_ratio);
      write_text(fs::path(out) / "per_image.csv", text);
      fmt::print("images={} size={}x{}\n", r.images, r.height, r.width);
    } else if (*entropy_cmd) {
      const analysis::EntropyStats st = analysis::entropy_stats(analysis::list_images(dir), window, bins);
      std::string text = "bin_lo,count,density\n";
      for (std::size_t b = 0; b < st.counts.size(); ++b)
        text += fmt::format("{:.17g},{},{:.17g}\n", st.bin_lo[b], st.counts[b], st.density[b]);
      write_text(out, text);
      fmt::print("samples={} mean_entropy={:.6f}\n", st.samples, st.mean);
    } else if (*kde_cmd) {
      train::RunConfig cfg = copts.resolve();
      const std::vector<fs::path> files = analysis::list_images(dir);
      const analysis::KdeResult k = analysis::texture_kde(files, cfg.smash, seed, points);
      fs::create_directories(out);
      std::string text = "x,density\n";
      for (std::size_t i = 0; i < k.grid.size(); ++i)
        text += fmt::format("{:.17g},{:.17g}\n", k.grid[i], k.density[i]);
      write_text(fs::path(out) / "kde.csv", text);
      text = "path,texture_richness\n";
      for (std::size_t i = 0; i < files.size(); ++i)
        text += fmt::format("{},{:.17g}\n", files[i].string(), k.samples[i]);
      write_text(fs::path(out) / "richness.csv", text);
      fmt::print("images={} bandwidth={:.6g}{}\n", files.size(), k.bandwidth,
                 k.floored ? " (floor)" : "");
    } else if (*feat_cmd) {
      train::RunConfig cfg = copts.resolve(checkpoint);
      model::Detector<float> m = load_model(checkpoint, cfg);
      require_file(manifest);
      const train::ImageSource src(train::load_manifest(manifest), cfg.cache_images, cfg.workers);
      const train::Scores s = train::score(m, src, cfg);
      std::string text;
      for (std::size_t d = 0; d < model::kDiscChannels; ++d) text += fmt::format("f{},", d);
      text += "label,source\n";
      for (std::size_t i = 0; i < s.features.size(); ++i)
        text += fmt::format("{:.9g},{},{}\n", fmt::join(s.features[i], ","), s.labels[i], s.sources[i]);
      write_text(out, text);
      fmt::print("rows={}\n", s.features.size());
    } else if (*toy_cmd) {
      const auto recs = train::write_toy_dataset(out, toy);
      fmt::print("wrote {} images and {}\n", recs.size(), (fs::path(out) / "manifest.csv").string());
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "s2fnet: error: " << msg << "\n";
    return 1;
  }
  return 0;
}
