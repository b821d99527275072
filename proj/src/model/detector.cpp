// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/model/detector.hpp"

#include <fmt/format.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "s2f/tensor/init.hpp"

namespace s2f::model {

Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::kFull;
  if (s == "no_lfa") return Ablation::kNoLfa;
  if (s == "no_low") return Ablation::kNoLow;
  if (s == "no_high") return Ablation::kNoHigh;
  throw std::invalid_argument("unknown ablation '" + s +
                              "' (expected full, no_lfa, no_low, no_high)");
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoLfa: return "no_lfa";
    case Ablation::kNoLow: return "no_low";
    case Ablation::kNoHigh: return "no_high";
  }
  return "unknown";
}

lfa::LfaBypass bypass_for(Ablation a) {
  return {a == Ablation::kNoLfa || a == Ablation::kNoHigh,
          a == Ablation::kNoLfa || a == Ablation::kNoLow};
}

lfa::LfaConfig ModelConfig::lfa_config() const {
  lfa::LfaConfig c;
  c.channels = srm::kEncoderChannels;
  c.groups = groups;
  c.alpha = alpha;
  c.energy_norm = energy_norm;
  c.mask_mode = mask_mode;
  c.height = c.width = view_size;
  return c;
}

std::string ModelConfig::to_text() const {
  return fmt::format("view_size={}\ngroups={}\nalpha={}\nenergy_norm={}\nmask_mode={}\n",
                     view_size, groups, alpha, energy_norm ? "true" : "false",
                     lfa::mask_mode_name(mask_mode));
}

std::uint64_t ModelConfig::hash() const { return fnv1a(to_text()); }

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad model config line: " + line);
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "view_size") m.view_size = std::stoul(v);
    else if (k == "groups") m.groups = std::stoul(v);
    else if (k == "alpha") m.alpha = std::stod(v);
    else if (k == "energy_norm") m.energy_norm = v == "true";
    else if (k == "mask_mode") m.mask_mode = lfa::parse_mask_mode(v);
    else throw std::invalid_argument("unknown model config key: " + k);
  }
  return m;
}

template <typename T>
Discriminator<T> Discriminator<T>::make(Rng& rng) {
  Discriminator d;
  for (std::size_t i = 0; i < kDiscConvs; ++i) {
    const std::size_t in = i == 0 ? kFusedChannels : kDiscChannels;
    d.convs[i].weight = he_uniform<T>({kDiscChannels, in, 3, 3}, in * 9, rng);
    d.convs[i].bn = ops::BatchNorm2d<T>::make(kDiscChannels);
  }
  d.fc_weight = Tensor<T>::zeros({kDiscChannels, 1}, true);
  uniform_fill(d.fc_weight, 1.0 / std::sqrt(static_cast<double>(kDiscChannels)), rng);
  d.fc_bias = Tensor<T>::zeros({1}, true);
  return d;
}

template <typename T>
Tensor<T> Discriminator<T>::forward(Tape<T>* tape, const Tensor<T>& fused,
                                    bool training, Tensor<T>* features) {
  if (fused.rank() != 4 || fused.dim(1) != kFusedChannels)
    throw DimensionError("discriminator: expected [B,64,H,W], got " +
                         shape_str(fused.shape()));
  Tensor<T> x = fused;
  int pool_stage = 0;
  for (std::size_t i = 0; i < kDiscConvs; ++i) {
    x = ops::conv2d(tape, x, convs[i].weight, 1, 1);
    x = ops::batchnorm2d(tape, x, convs[i].bn, training);
    x = ops::relu(tape, x);
    if (i == 3 || i == 5 || i == 7) {
      ++pool_stage;
      if (x.dim(2) < 2 || x.dim(3) < 2)
        throw DimensionError("discriminator: average pool " +
                             std::to_string(pool_stage) + " needs at least 2x2, got " +
                             std::to_string(x.dim(2)) + "x" + std::to_string(x.dim(3)));
      x = ops::avgpool2d(tape, x, 2, 2);
    }
  }
  Tensor<T> pooled = ops::reshape(tape, ops::adaptive_avgpool(tape, x),
                                  {x.dim(0), kDiscChannels});
  if (features) *features = pooled;
  return ops::linear(tape, pooled, fc_weight, fc_bias);
}

template <typename T>
Tensor<T> fuse(Tape<T>* tape, const Tensor<T>& rich, const Tensor<T>& poor) {
  if (rich.rank() != 4 || poor.rank() != 4 || rich.dim(1) != kDiscChannels ||
      poor.dim(1) != kDiscChannels || rich.dim(0) != poor.dim(0) ||
      rich.dim(2) != poor.dim(2) || rich.dim(3) != poor.dim(3))
    throw DimensionError("fuse: " + shape_str(rich.shape()) + " vs " +
                         shape_str(poor.shape()));
  return ops::concat_channels(tape, rich, poor);
}

template <typename T>
Detector<T> Detector<T>::make(const ModelConfig& cfg, std::uint64_t seed) {
  Detector m;
  m.cfg_ = cfg;
  Rng enc_rng(derive_seed(seed, 1));
  Rng disc_rng(derive_seed(seed, 2));
  m.encoder_ = srm::SrmEncoder<T>::make(enc_rng);
  m.lfa_ = lfa::LfaState<T>::make(cfg.lfa_config());
  m.disc_ = Discriminator<T>::make(disc_rng);
  return m;
}

template <typename T>
ForwardResult<T> Detector<T>::forward(Tape<T>* tape, const Tensor<T>& rich,
                                      const Tensor<T>& poor, bool training) {
  for (const Tensor<T>* v : {&rich, &poor})
    if (v->rank() != 4 || v->dim(1) != 3 || v->dim(2) != cfg_.view_size ||
        v->dim(3) != cfg_.view_size)
      throw DimensionError("detector: views must be [B,3," +
                           std::to_string(cfg_.view_size) + "," +
                           std::to_string(cfg_.view_size) + "], got " +
                           shape_str(v->shape()));
  if (rich.dim(0) != poor.dim(0))
    throw DimensionError("detector: rich/poor batch sizes differ");
  const std::size_t nb = rich.dim(0);
  // One encoder pass over both views so they share batch statistics.
  Tensor<T> residuals =
      ops::concat_batch<T>(nullptr, srm::apply_srm(rich), srm::apply_srm(poor));
  Tensor<T> enc = encoder_.forward(tape, residuals, training);
  Tensor<T> f_rich = ops::slice_batch(tape, enc, 0, nb);
  Tensor<T> f_poor = ops::slice_batch(tape, enc, nb, 2 * nb);
  lfa::LfaOutput<T> lo =
      lfa::lfa_forward(tape, f_rich, f_poor, lfa_, bypass_for(ablation_));
  ForwardResult<T> r;
  r.logits = disc_.forward(tape, fuse(tape, lo.rich, lo.poor), training, &r.features);
  r.energy_rich = lo.energy_rich;
  r.energy_poor = lo.energy_poor;
  return r;
}

template <typename T>
std::vector<NamedTensor<T>> Detector<T>::named_parameters() {
  std::vector<NamedTensor<T>> p = {
      {"encoder.conv.weight", encoder_.weight},
      {"encoder.bn.gamma", encoder_.bn.gamma},
      {"encoder.bn.beta", encoder_.bn.beta},
      {"lfa.high.mask", lfa_.high.mask},
      {"lfa.high.weights", lfa_.high.weights},
      {"lfa.low.mask", lfa_.low.mask},
      {"lfa.low.weights", lfa_.low.weights},
  };
  for (std::size_t i = 0; i < kDiscConvs; ++i) {
    const std::string pre = "disc.conv" + std::to_string(i);
    p.push_back({pre + ".weight", disc_.convs[i].weight});
    p.push_back({pre + ".bn.gamma", disc_.convs[i].bn.gamma});
    p.push_back({pre + ".bn.beta", disc_.convs[i].bn.beta});
  }
  p.push_back({"disc.fc.weight", disc_.fc_weight});
  p.push_back({"disc.fc.bias", disc_.fc_bias});
  return p;
}

template <typename T>
std::vector<NamedTensor<T>> Detector<T>::named_buffers() {
  std::vector<NamedTensor<T>> b = {
      {"encoder.bn.running_mean", encoder_.bn.running_mean},
      {"encoder.bn.running_var", encoder_.bn.running_var},
  };
  for (std::size_t i = 0; i < kDiscConvs; ++i) {
    const std::string pre = "disc.conv" + std::to_string(i);
    b.push_back({pre + ".bn.running_mean", disc_.convs[i].bn.running_mean});
    b.push_back({pre + ".bn.running_var", disc_.convs[i].bn.running_var});
  }
  return b;
}

template <typename T>
std::vector<Tensor<T>> Detector<T>::parameters() {
  std::vector<Tensor<T>> out;
  for (auto& nt : named_parameters()) out.push_back(nt.tensor);
  return out;
}

template <typename T>
std::size_t Detector<T>::parameter_count() {
  std::size_t n = 0;
  for (auto& nt : named_parameters()) n += nt.tensor.numel();
  return n;
}

template struct Discriminator<float>;
template struct Discriminator<double>;
template Tensor<float> fuse<float>(Tape<float>*, const Tensor<float>&,
                                   const Tensor<float>&);
template Tensor<double> fuse<double>(Tape<double>*, const Tensor<double>&,
                                     const Tensor<double>&);
template class Detector<float>;
template class Detector<double>;

}  // namespace s2f::model
