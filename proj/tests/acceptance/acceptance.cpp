// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the eleven acceptance checks and prints one PASS/FAIL line per check.
// Exit status is nonzero if any check fails.

#include <fmt/core.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "s2f/analysis/analysis.hpp"
#include "s2f/lfa/lfa.hpp"
#include "s2f/model/checkpoint.hpp"
#include "s2f/model/detector.hpp"
#include "s2f/smash/smash.hpp"
#include "s2f/srm/srm.hpp"
#include "s2f/tensor/fft.hpp"
#include "s2f/train/experiments.hpp"
#include "s2f/train/metrics.hpp"
#include "s2f/train/report.hpp"
#include "s2f/train/toy.hpp"
#include "s2f/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace s2f;
using D = Tensor<double>;
using Clock = std::chrono::steady_clock;

namespace {

// Collects failures for one criterion; the first few are echoed.
struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path work_dir() {
  static const fs::path d = [] {
    const fs::path p = fs::temp_directory_path() / "s2fnet_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// Toy-scale run settings shared by the training checks.
train::RunConfig toy_run_config() {
  train::RunConfig c;
  c.smash.patch_size = 4;
  c.smash.patch_count = 48;
  c.smash.view_size = 16;
  c.model.view_size = 16;
  c.input_size = 32;
  c.epochs = 20;
  c.workers = 1;
  c.seed = 0;
  return c;
}

// ---- 1: gradients -------------------------------------------------------

void criterion_gradients(Check& ck) {
  Rng rng(2026);
  model::ModelConfig mc;
  mc.view_size = 64;
  model::Detector<double> net = model::Detector<double>::make(mc, 17);
  // Perturb the masks away from their radial init so mask gradients are generic.
  for (D* m : {&net.lfa().high.mask, &net.lfa().low.mask})
    for (double& v : m->data()) v += rng.uniform(-0.3, 0.3);
  const D rich = oracle::random_tensor({2, 3, 64, 64}, rng, 0, 1);
  const D poor = oracle::random_tensor({2, 3, 64, 64}, rng, 0, 1);
  const std::vector<std::uint8_t> labels{0, 1};
  auto loss_of = [&](Tape<double>* tape) {
    return ops::bce_with_logits(tape, net.forward(tape, rich, poor, true).logits, labels);
  };
  // Loss value with an optional relu trace installed.
  auto traced = [&](ops::ReluTrace* trace) {
    ops::set_relu_trace(trace);
    const double v = loss_of(nullptr)[0];
    ops::set_relu_trace(nullptr);
    return v;
  };

  auto params = net.named_parameters();
  for (auto& p : params) p.tensor.zero_grad();
  Tape<double> tape;
  D loss = loss_of(&tape);
  tape.backward(loss);
  ops::ReluTrace base;
  traced(&base);

  // A stencil whose relu sign pattern differs from the base point straddles a
  // kink, so its raw difference quotient is not a derivative estimate. Those
  // are re-evaluated with the base pattern pinned, i.e. on the linear piece
  // that contains the base point.
  const double h = 1e-5;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
  double worst = 0, worst_raw_kinked = 0;
  std::string worst_name;
  std::size_t checked = 0, kinked = 0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.tensor.grad().begin(), p.tensor.grad().end());
    const std::size_t n = p.tensor.numel();
    std::set<std::size_t> picks;
    const std::size_t want = std::min<std::size_t>(n, 4);
    while (picks.size() < want) picks.insert(rng.below(n));
    double group_worst = 0;
    for (const std::size_t i : picks) {
      const double old = p.tensor[i];
      ops::ReluTrace tp, tm;
      p.tensor[i] = old + h;
      const double fp = traced(&tp);
      p.tensor[i] = old - h;
      const double fm = traced(&tm);
      double err = rel((fp - fm) / (2 * h), analytic[i]);
      if (tp.signs != base.signs || tm.signs != base.signs) {
        ++kinked;
        worst_raw_kinked = std::max(worst_raw_kinked, err);
        ops::ReluTrace pp, pm;
        pp.pinned = pm.pinned = &base.signs;
        p.tensor[i] = old + h;
        const double gp = traced(&pp);
        p.tensor[i] = old - h;
        const double gm = traced(&pm);
        err = rel((gp - gm) / (2 * h), analytic[i]);
      }
      p.tensor[i] = old;
      group_worst = std::max(group_worst, err);
      ++checked;
    }
    if (group_worst >= worst) worst = group_worst, worst_name = p.name;
    ck.expect(group_worst < 1e-3, fmt::format("{} rel err {:.2e}", p.name, group_worst));
  }
  ck.note(fmt::format("end-to-end: {} groups, {} elements, max rel err {:.2e} ({}); {} stencils crossed a "
                      "relu kink and were pinned (raw err there up to {:.2e})",
                      params.size(), checked, worst, worst_name, kinked, worst_raw_kinked));

  // Per-op checks on full tensors.
  double op_worst = 0;
  auto op = [&](const char* name, std::vector<D> in,
                const std::function<D(Tape<double>*, std::vector<D>&)>& f) {
    for (double e : oracle::gradcheck(std::move(in), f)) {
      op_worst = std::max(op_worst, e);
      ck.expect(e < 1e-4, fmt::format("op {} rel err {:.2e}", name, e));
    }
  };
  oracle::Projector proj(5);
  op("conv2d", {oracle::random_tensor({2, 3, 6, 5}, rng), oracle::random_tensor({4, 3, 3, 3}, rng)},
     [&](Tape<double>* t, std::vector<D>& v) { return proj(t, ops::conv2d(t, v[0], v[1], 1, 1)); });
  {
    auto bn = ops::BatchNorm2d<double>::make(3);
    op("batchnorm", {oracle::random_tensor({4, 3, 3, 3}, rng), oracle::random_tensor({3}, rng, 0.5, 1.5),
                     oracle::random_tensor({3}, rng)},
       [&](Tape<double>* t, std::vector<D>& v) {
         bn.gamma = v[1];
         bn.beta = v[2];
         return proj(t, ops::batchnorm2d(t, v[0], bn, true));
       });
  }
  op("fft-mask-abs", {oracle::random_tensor({1, 2, 8, 6}, rng), oracle::random_tensor({2, 8, 6}, rng)},
     [&](Tape<double>* t, std::vector<D>& v) {
       return proj(t, fft::abs(t, lfa::mask_spectrum(t, v[0], v[1])));
     });
  op("group-energy+recalibrate",
     {oracle::random_tensor({2, 8, 4, 4}, rng), oracle::random_tensor({4, 4, 4}, rng),
      oracle::random_tensor({4}, rng, 0.5, 1.5)},
     [&](Tape<double>* t, std::vector<D>& v) {
       const auto z = lfa::mask_spectrum(t, v[0], v[1]);
       const D e = lfa::group_energy(t, z, 4, true);
       return proj(t, lfa::recalibrate(t, v[0], e, v[2]));
     });
  op("avgpool+linear", {oracle::random_tensor({2, 3, 4, 4}, rng), oracle::random_tensor({3, 2}, rng),
                        oracle::random_tensor({2}, rng)},
     [&](Tape<double>* t, std::vector<D>& v) {
       const D p = ops::reshape(t, ops::adaptive_avgpool(t, ops::avgpool2d(t, v[0], 2, 2)), {2, 3});
       return proj(t, ops::linear(t, p, v[1], v[2]));
     });
  ck.note(fmt::format("per-op max rel err {:.2e}", op_worst));
}

// ---- 2: FFT / DCT -------------------------------------------------------

void criterion_fft(Check& ck) {
  Rng rng(2);
  double dft = 0, parseval = 0, round = 0, dct = 0;
  for (std::size_t h : {1, 2, 3, 4, 5, 7, 8, 12, 16})
    for (std::size_t w : {1, 2, 5, 6, 8, 9, 16}) {
      const D x = oracle::random_tensor({h, w}, rng);
      const auto z = fft::fft2<double>(nullptr, x);
      const std::vector<double> re(x.data().begin(), x.data().end());
      const auto [ore, oim] = oracle::dft2(re, std::vector<double>(h * w, 0.0), h, w);
      double ex = 0, ez = 0;
      for (std::size_t i = 0; i < h * w; ++i) {
        dft = std::max({dft, std::abs(z.re()[i] - ore[i]), std::abs(z.im()[i] - oim[i])});
        ex += x[i] * x[i];
        ez += z.re()[i] * z.re()[i] + z.im()[i] * z.im()[i];
      }
      parseval = std::max(parseval, std::abs(ez - double(h * w) * ex) / (double(h * w) * ex));
      const auto back = fft::ifft2(z);
      for (std::size_t i = 0; i < h * w; ++i)
        round = std::max({round, std::abs(back.re()[i] - x[i]), std::abs(back.im()[i])});
      const auto d = analysis::dct2(re, h, w), od = oracle::dct2(re, h, w);
      for (std::size_t i = 0; i < h * w; ++i) dct = std::max(dct, std::abs(d[i] - od[i]));
    }
  ck.expect(dft <= 1e-9, fmt::format("fft vs dft {:.2e}", dft));
  ck.expect(parseval <= 1e-6, fmt::format("parseval {:.2e}", parseval));
  ck.expect(round <= 1e-10, fmt::format("round trip {:.2e}", round));
  ck.expect(dct <= 1e-9, fmt::format("dct {:.2e}", dct));
  ck.note(fmt::format("dft {:.1e}, parseval {:.1e}, round trip {:.1e}, dct {:.1e}", dft, parseval,
                      round, dct));
}

// ---- 3: smash -----------------------------------------------------------

void criterion_smash(Check& ck) {
  Rng rng(3);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = 2 + rng.below(31);
    const image::ImageU8 img = oracle::random_image(m + rng.below(9), m + rng.below(9), rng);
    const std::size_t x0 = rng.below(img.width - m + 1), y0 = rng.below(img.height - m + 1);
    exact += smash::ldiv(img.data.data() + (y0 * img.width + x0) * 3, m, img.width * 3) ==
             oracle::ldiv(img, x0, y0, m);
  }
  ck.expect(exact == 100, fmt::format("ldiv exact on {}/100 patches", exact));

  int ordered = 0;
  const smash::SmashConfig cfg{4, 48, 16};
  for (int t = 0; t < 100; ++t) {
    image::ImageU8 img = oracle::random_image(24 + rng.below(40), 24 + rng.below(40), rng);
    for (auto& v : img.data)
      if (rng.uniform() < 0.5) v = 100;
    const smash::SmashResult r = smash::smash(img, cfg, rng);
    const auto& p = r.sampled.patches;
    std::uint64_t rich_min = UINT64_MAX, poor_max = 0;
    for (std::size_t i : r.views.rich_idx) rich_min = std::min(rich_min, p[i].ldiv);
    for (std::size_t i : r.views.poor_idx) poor_max = std::max(poor_max, p[i].ldiv);
    std::set<std::size_t> rs(r.views.rich_idx.begin(), r.views.rich_idx.end());
    std::set<std::size_t> ps(r.views.poor_idx.begin(), r.views.poor_idx.end());
    bool ok = rs.size() == 16 && ps.size() == 16;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!rs.count(i)) ok = ok && p[i].ldiv <= rich_min;
      if (!ps.count(i)) ok = ok && p[i].ldiv >= poor_max;
    }
    ordered += ok;
  }
  ck.expect(ordered == 100, fmt::format("order statistic on {}/100 images", ordered));

  // Left half noise, right half constant; 24x8 grid cells, default view.
  image::ImageU8 img = image::ImageU8::blank(768, 256, 128);
  for (std::size_t y = 0; y < 256; ++y)
    for (std::size_t x = 0; x < 384; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<std::uint8_t>(rng.below(256));
  const smash::SmashResult r = smash::smash(img, smash::SmashConfig{}, rng);
  bool routed = r.sampled.mode == smash::SampleMode::kGrid && !r.views.rich_idx.empty();
  for (std::size_t i : r.views.rich_idx) routed = routed && r.sampled.patches[i].x0 + 32 <= 384;
  for (std::size_t i : r.views.poor_idx) routed = routed && r.sampled.patches[i].x0 >= 384;
  ck.expect(routed, "half-noise fixture routing");
  ck.note(fmt::format("ldiv {}/100 exact, order statistic {}/100, routing {}", exact, ordered,
                      routed ? "ok" : "wrong"));
}

// ---- 4: SRM -------------------------------------------------------------

void criterion_srm(Check& ck) {
  const auto& bank = srm::filter_bank();
  std::set<srm::Kernel5> distinct;
  int zero_sum = 0;
  for (const auto& k : bank) {
    int s = 0;
    for (const auto& row : k.k)
      for (int v : row) s += v;
    zero_sum += s == 0;
    distinct.insert(k.k);
  }
  ck.expect(bank.size() == 30 && zero_sum == 30 && distinct.size() == 30,
            fmt::format("bank size {}, zero-sum {}, distinct {}", bank.size(), zero_sum, distinct.size()));

  bool zero = true;
  const D flat = srm::apply_srm(D::full({2, 3, 11, 13}, 0.37));
  for (double v : flat.data()) zero = zero && v == 0.0;
  ck.expect(zero, "constant image residual not exactly zero");

  Rng rng(4);
  const std::size_t h = 10, w = 7;
  const D x = oracle::random_tensor({2, 3, h, w}, rng, 0, 1);
  const D r = srm::apply_srm(x);
  double err = 0;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 30; ++k)
      for (std::size_t c = 0; c < 3; ++c)
        for (long y = 0; y < long(h); ++y)
          for (long xx = 0; xx < long(w); ++xx) {
            double acc = 0;
            for (long i = 0; i < 5; ++i)
              for (long j = 0; j < 5; ++j)
                acc += bank[k].k[i][j] * x[((b * 3 + c) * h + std::clamp(y + i - 2, 0L, long(h) - 1)) * w +
                                           std::clamp(xx + j - 2, 0L, long(w) - 1)];
            err = std::max(err, std::abs(r[((b * 90 + 3 * k + c) * h + y) * w + xx] - acc));
          }
  ck.expect(err < 1e-12, fmt::format("depthwise oracle err {:.2e}", err));
  ck.note(fmt::format("30 zero-sum kernels, constant residual exact, depthwise err {:.1e}", err));
}

// ---- 5: LFA -------------------------------------------------------------

void criterion_lfa(Check& ck) {
  const double alpha = 0.5;
  const D d = lfa::distance_matrix<double>(256, 256);
  const D hi = lfa::init_high_mask(d, alpha, 8), lo = lfa::init_low_mask(d, alpha, 8);
  double sum_err = 0;
  for (std::size_t i = 0; i < hi.numel(); ++i) sum_err = std::max(sum_err, std::abs(hi[i] + lo[i] - 3 * alpha));
  ck.expect(sum_err == 0.0, fmt::format("M_high + M_low off by {:.2e}", sum_err));
  const std::size_t center = 128 * 256 + 128;
  ck.expect(hi[center] == alpha && lo[center] == 2 * alpha, "center values");
  ck.expect(hi[0] == 2 * alpha && lo[0] == alpha, "corner values");

  Rng rng(5);
  ComplexTensor<double> z = ComplexTensor<double>::zeros({2, 8, 6, 5});
  for (std::size_t i = 0; i < z.numel(); ++i) z.re()[i] = rng.uniform(-2, 2), z.im()[i] = rng.uniform(-2, 2);
  const D e = lfa::group_energy<double>(nullptr, z, 4, false);
  double energy_err = 0;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t g = 0; g < 4; ++g) {
      double acc = 0;
      for (std::size_t c = 2 * g; c < 2 * g + 2; ++c)
        for (std::size_t i = 0; i < 30; ++i) acc += std::hypot(z.re()[(n * 8 + c) * 30 + i], z.im()[(n * 8 + c) * 30 + i]);
      energy_err = std::max(energy_err, std::abs(e[n * 4 + g] - acc));
    }
  ck.expect(energy_err <= 1e-9, fmt::format("group energy err {:.2e}", energy_err));

  const D f = oracle::random_tensor({2, 8, 16, 12}, rng);
  const D mask = oracle::random_tensor({4, 16, 12}, rng, -2, 2);
  const D e0 = lfa::group_energy<double>(nullptr, lfa::mask_spectrum<double>(nullptr, f, mask), 4, true);
  double shift_err = 0;
  for (auto [dy, dx] : {std::pair<std::size_t, std::size_t>{1, 0}, {0, 5}, {7, 3}, {15, 11}}) {
    D s = D::zeros(f.shape());
    for (std::size_t p = 0; p < 16; ++p)
      for (std::size_t i = 0; i < 16; ++i)
        for (std::size_t j = 0; j < 12; ++j) s[(p * 16 + (i + dy) % 16) * 12 + (j + dx) % 12] = f[(p * 16 + i) * 12 + j];
    const D e1 = lfa::group_energy<double>(nullptr, lfa::mask_spectrum<double>(nullptr, s, mask), 4, true);
    for (std::size_t i = 0; i < e0.numel(); ++i) shift_err = std::max(shift_err, std::abs(e1[i] - e0[i]));
  }
  ck.expect(shift_err <= 1e-6, fmt::format("shift invariance err {:.2e}", shift_err));
  ck.note(fmt::format("init identities exact, energy err {:.1e}, shift err {:.1e}", energy_err, shift_err));
}

// ---- 6: metrics ---------------------------------------------------------

void criterion_metrics(Check& ck) {
  const double hand = train::average_precision(std::vector<double>{0.9, 0.8, 0.7, 0.1},
                                               std::vector<std::uint8_t>{1, 0, 1, 0});
  ck.expect(std::abs(hand - 5.0 / 6.0) < 1e-15, fmt::format("4-point AP {:.17g}", hand));
  Rng rng(6);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(199);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? rng.uniform() : std::floor(rng.uniform() * 10) / 10;
      y[i] = rng.bernoulli(0.5);
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(train::average_precision(s, y) - oracle::average_precision(s, y)));
  }
  ck.expect(worst <= 1e-12, fmt::format("AP vs brute force {:.2e}", worst));
  ck.note(fmt::format("4-point AP {:.6f}, brute-force max diff {:.1e}", hand, worst));
}

// ---- 7-10: toy experiment and plumbing ----------------------------------

struct ToyState {
  std::vector<train::Record> train_records, heldout;
  std::optional<train::TrainResult> full, no_lfa;
  train::RunConfig cfg;
};

bool lfa_matches_init(model::Detector<float>& m) {
  const auto& s = m.lfa();
  auto same = [](const Tensor<float>& a, const Tensor<float>& b) {
    return a.numel() == b.numel() && std::memcmp(a.ptr(), b.ptr(), a.numel() * sizeof(float)) == 0;
  };
  const Tensor<float> ones = Tensor<float>::full({s.cfg.groups}, 1.0f);
  return same(s.high.mask, s.initial_high()) && same(s.low.mask, s.initial_low()) &&
         same(s.high.weights, ones) && same(s.low.weights, ones);
}

void criterion_toy(Check& ck, ToyState& st) {
  const fs::path dir = work_dir() / "toy";
  st.train_records = train::write_toy_dataset(dir / "train", train::ToyConfig{});
  train::ToyConfig held;
  held.per_class = 100;
  held.seed = 1007;
  st.heldout = train::write_toy_dataset(dir / "heldout", held);
  st.cfg = toy_run_config();

  const auto t0 = Clock::now();
  st.full = train::train(st.train_records, {}, st.cfg);
  const double full_s = seconds_since(t0);
  const train::ImageSource src(st.heldout, true, 1);
  const double full_train = st.full->history.back().train_acc;
  const double full_held = train::evaluate(st.full->model, src, st.cfg).overall.acc;

  train::RunConfig nl = st.cfg;
  nl.ablation = model::Ablation::kNoLfa;
  const auto t1 = Clock::now();
  st.no_lfa = train::train(st.train_records, {}, nl);
  const double nl_s = seconds_since(t1);
  const double nl_held = train::evaluate(st.no_lfa->model, src, nl).overall.acc;

  ck.expect(full_train >= 0.95, fmt::format("train acc {:.4f} < 0.95", full_train));
  ck.expect(full_held >= 0.90, fmt::format("held-out acc {:.4f} < 0.90", full_held));
  ck.expect(full_s < 15 * 60, fmt::format("training took {:.0f} s", full_s));
  ck.expect(st.no_lfa->history.size() == st.cfg.epochs, "no_lfa run incomplete");
  ck.note(fmt::format("full: train {:.4f}, held-out {:.4f}, {} epochs in {:.0f} s", full_train,
                      full_held, st.full->history.size(), full_s));
  ck.note(fmt::format("no_lfa: held-out {:.4f} in {:.0f} s; full >= no_lfa: {}", nl_held, nl_s,
                      full_held >= nl_held ? "yes" : "no"));
}

void criterion_plumbing(Check& ck, ToyState& st) {
  ck.expect(st.no_lfa.has_value() && lfa_matches_init(st.no_lfa->model),
            "no_lfa changed LFA tensors");

  // Small, short sweep: only the plumbing is under test.
  train::RunConfig cfg = toy_run_config();
  cfg.epochs = 1;
  train::ExperimentData data;
  data.train.assign(st.train_records.begin(), st.train_records.begin() + 64);
  data.train.insert(data.train.end(), st.train_records.end() - 64, st.train_records.end());
  data.eval.assign(st.heldout.begin(), st.heldout.begin() + 16);
  data.eval.insert(data.eval.end(), st.heldout.end() - 16, st.heldout.end());
  const fs::path out = work_dir() / "sweep";
  const auto rows = train::run_group_sweep(data, cfg, {8, 16, 32}, out);
  ck.expect(rows.size() == 3, "sweep rows");
  std::size_t files = 0;
  for (const auto& r : rows) {
    ck.expect(r.step0_max_abs_diff == 0.0, fmt::format("G{} step-0 diff {}", r.groups, r.step0_max_abs_diff));
    for (const auto& e : fs::directory_iterator(out / fmt::format("G{}", r.groups))) {
      const std::string name = e.path().filename().string();
      if (name.find("_step0.csv") == std::string::npos) continue;
      ++files;
      const train::Matrix m = train::read_matrix_csv(e.path());
      ck.expect(m.rows == 16 && m.cols == 16, name + " shape");
      for (double v : m.values) ck.expect(v == 0.0, name + " has a nonzero entry");
    }
  }
  ck.expect(files == 2 * (8 + 16 + 32), fmt::format("{} step-0 CSVs", files));
  ck.note(fmt::format("no_lfa LFA tensors bit-identical to init; {} step-0 mask CSVs all zero", files));
}

void criterion_robustness(Check& ck, ToyState& st) {
  ck.expect(st.full.has_value(), "no trained model");
  if (!st.full) return;
  const train::ImageSource src(st.heldout, true, 1);
  const auto reports = train::run_robustness(st.full->model, src, st.cfg);
  ck.expect(reports.size() == 4, "four degradation reports");
  if (reports.size() != 4) return;
  train::write_json([&] {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : reports) j.push_back(train::to_json(r));
    return j;
  }(), work_dir() / "robustness.json");
  std::ifstream in(work_dir() / "robustness.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  ck.expect(j[1]["degradation"]["kind"] == "jpeg" && j[1]["degradation"]["qf"] == 95, "jpeg QF 95");
  ck.expect(j[2]["degradation"]["kind"] == "blur" && j[2]["degradation"]["sigma"] == 1.0, "blur sigma 1");
  ck.expect(j[3]["degradation"]["kind"] == "downsample" && j[3]["degradation"]["r"] == 0.5, "downsample r 0.5");

  const train::Scores plain = train::score(st.full->model, src, st.cfg);
  const train::Scores clean = train::score(st.full->model, src, st.cfg, image::DegradeSpec::clean());
  const bool bitwise = plain.probs.size() == clean.probs.size() &&
                       std::memcmp(plain.probs.data(), clean.probs.data(), plain.probs.size() * sizeof(double)) == 0;
  ck.expect(bitwise, "clean path differs from plain eval");
  const train::EvalReport plain_report = train::evaluate(st.full->model, src, st.cfg);
  ck.expect(plain_report.overall.acc == reports[0].overall.acc && plain_report.overall.ap == reports[0].overall.ap,
            "clean report differs from plain eval");
  ck.note(fmt::format("acc clean {:.3f} jpeg95 {:.3f} blur1 {:.3f} down0.5 {:.3f}", reports[0].overall.acc,
                      reports[1].overall.acc, reports[2].overall.acc, reports[3].overall.acc));
}

void criterion_checkpoint(Check& ck, ToyState& st) {
  ck.expect(st.full.has_value(), "no trained model");
  if (!st.full) return;
  const fs::path p = work_dir() / "full.s2fc";
  model::save_checkpoint(st.full->model, p);
  model::Detector<float> loaded = model::load_checkpoint<float>(p);
  const train::ImageSource src(st.heldout, true, 1);
  const train::Scores a = train::score(st.full->model, src, st.cfg);
  const train::Scores b = train::score(loaded, src, st.cfg);
  const bool same = std::memcmp(a.probs.data(), b.probs.data(), a.probs.size() * sizeof(double)) == 0;
  const auto ra = train::summarize(a, "x", {}), rb = train::summarize(b, "x", {});
  ck.expect(same && ra.overall.acc == rb.overall.acc && ra.overall.ap == rb.overall.ap,
            "reloaded model scores differ");

  std::ifstream in(p, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  int rejected = 0, tried = 0;
  Rng rng(10);
  for (int t = 0; t < 8; ++t) {
    std::vector<char> b2 = bytes;
    b2[rng.below(b2.size())] ^= static_cast<char>(1 + rng.below(255));
    const fs::path q = work_dir() / "tampered.s2fc";
    std::ofstream(q, std::ios::binary).write(b2.data(), b2.size());
    ++tried;
    try {
      model::load_checkpoint<float>(q);
    } catch (const model::CheckpointError&) {
      ++rejected;
    }
  }
  ck.expect(rejected == tried, fmt::format("{}/{} tampered files rejected", rejected, tried));
  ck.note(fmt::format("reload bit-identical (acc {:.4f}); {}/{} tampered files rejected", ra.overall.acc,
                      rejected, tried));
}

// ---- 11: parameter count --------------------------------------------------

void criterion_params(Check& ck) {
  model::Detector<float> m = model::Detector<float>::make(model::ModelConfig{}, 0);
  const std::size_t n = m.parameter_count();
  ck.expect(n >= 1'080'000 && n <= 1'320'000, fmt::format("{} outside [1.08M, 1.32M]", n));
  ck.expect(n == 1'176'625, fmt::format("{} != frozen 1176625", n));
  ck.note(fmt::format("{} trainable parameters", n));
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion ids select a subset; 8-10 need 7 to have run.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  set_finite_checks(true);
  ToyState toy;
  struct Entry {
    int id;
    const char* title;
    std::function<void(Check&)> fn;
  };
  const std::vector<Entry> entries = {
      {1, "gradients match central differences", criterion_gradients},
      {2, "FFT and DCT oracles", criterion_fft},
      {3, "smash oracles", criterion_smash},
      {4, "SRM bank and residuals", criterion_srm},
      {5, "LFA init identities and energy", criterion_lfa},
      {6, "AP and accuracy metrics", criterion_metrics},
      {7, "toy end-to-end experiment", [&](Check& c) { criterion_toy(c, toy); }},
      {8, "ablation and group-sweep plumbing", [&](Check& c) { criterion_plumbing(c, toy); }},
      {9, "robustness plumbing", [&](Check& c) { criterion_robustness(c, toy); }},
      {10, "checkpoint round trip", [&](Check& c) { criterion_checkpoint(c, toy); }},
      {11, "parameter count", criterion_params},
  };
  int failed = 0;
  std::size_t ran = 0;
  for (const Entry& e : entries) {
    if (!only.empty() && !only.count(e.id)) continue;
    ++ran;
    Check ck;
    const auto t0 = Clock::now();
    try {
      e.fn(ck);
    } catch (const std::exception& ex) {
      ck.failures.push_back(std::string("exception: ") + ex.what());
    }
    const bool ok = ck.failures.empty();
    failed += !ok;
    std::string detail;
    for (const auto& n : ck.notes) detail += (detail.empty() ? "" : "; ") + n;
    for (std::size_t i = 0; i < ck.failures.size() && i < 3; ++i) detail += " | " + ck.failures[i];
    fmt::print("[{}] criterion {:2}: {} ({:.1f} s) {}\n", ok ? "PASS" : "FAIL", e.id, e.title,
               seconds_since(t0), detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
