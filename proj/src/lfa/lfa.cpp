// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/lfa/lfa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace s2f::lfa {

MaskMode parse_mask_mode(const std::string& s) {
  if (s == "per_group") return MaskMode::kPerGroup;
  if (s == "shared") return MaskMode::kShared;
  throw std::invalid_argument("unknown mask mode '" + s +
                              "' (expected per_group or shared)");
}

const char* mask_mode_name(MaskMode m) {
  return m == MaskMode::kPerGroup ? "per_group" : "shared";
}

void LfaConfig::validate() const {
  if (groups == 0 || groups > channels || channels % groups != 0)
    throw std::invalid_argument("lfa: groups " + std::to_string(groups) +
                                " must divide channels " +
                                std::to_string(channels));
  if (!(alpha > 0)) throw std::invalid_argument("lfa: alpha must be > 0");
  if (height == 0 || width == 0)
    throw std::invalid_argument("lfa: mask size must be positive");
}

template <typename T>
Tensor<T> distance_matrix(std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw DimensionError("distance_matrix: empty extent");
  const double cy = static_cast<double>(h / 2), cx = static_cast<double>(w / 2);
  const double ry = std::max(cy, static_cast<double>(h - 1) - cy);
  const double rx = std::max(cx, static_cast<double>(w - 1) - cx);
  const double rmax = std::hypot(ry, rx);
  Tensor<T> d = Tensor<T>::zeros({h, w});
  for (std::size_t u = 0; u < h; ++u)
    for (std::size_t v = 0; v < w; ++v)
      d[u * w + v] = rmax > 0 ? static_cast<T>(std::hypot(u - cy, v - cx) / rmax)
                              : T(0);
  return d;
}

namespace {

template <typename T, typename F>
Tensor<T> replicate(const Tensor<T>& d, std::size_t copies, F f) {
  const std::size_t hw = d.numel();
  Shape shape = copies ? Shape{copies, d.dim(0), d.dim(1)} : d.shape();
  Tensor<T> m = Tensor<T>::zeros(shape, true);
  for (std::size_t c = 0; c < std::max<std::size_t>(copies, 1); ++c)
    for (std::size_t i = 0; i < hw; ++i) m[c * hw + i] = f(d[i]);
  return m;
}

}  // namespace

template <typename T>
Tensor<T> init_high_mask(const Tensor<T>& d, T alpha, std::size_t copies) {
  return replicate(d, copies, [alpha](T v) { return alpha * v + alpha; });
}

template <typename T>
Tensor<T> init_low_mask(const Tensor<T>& d, T alpha, std::size_t copies) {
  return replicate(d, copies, [alpha](T v) { return alpha * (T(1) - v) + alpha; });
}

template <typename T>
ComplexTensor<T> mask_spectrum(Tape<T>* tape, const Tensor<T>& f,
                               const Tensor<T>& mask) {
  if (f.rank() != 4) throw DimensionError("mask_spectrum: expected [B,C,H,W]");
  const std::size_t mr = mask.rank();
  if (mr < 2 || mask.dim(mr - 2) != f.dim(2) || mask.dim(mr - 1) != f.dim(3))
    throw DimensionError("mask_spectrum: mask " + shape_str(mask.shape()) +
                         " does not match features " + shape_str(f.shape()));
  ComplexTensor<T> z = fft::fftshift(tape, fft::fft2(tape, f));
  return fft::mul_real(tape, z, ops::sigmoid(tape, mask));
}

template <typename T>
Tensor<T> group_energy(Tape<T>* tape, const ComplexTensor<T>& z,
                       std::size_t groups, bool energy_norm) {
  const Shape& s = z.shape();
  if (s.size() != 4) throw DimensionError("group_energy: expected [B,C,H,W]");
  if (groups == 0 || s[1] % groups != 0)
    throw DimensionError("group_energy: " + std::to_string(s[1]) +
                         " channels not divisible by " + std::to_string(groups));
  const T divisor =
      energy_norm ? static_cast<T>(s[2] * s[3] * (s[1] / groups)) : T(1);
  return ops::group_sum(tape, fft::abs(tape, z), groups, divisor);
}

template <typename T>
Tensor<T> recalibrate(Tape<T>* tape, const Tensor<T>& f, const Tensor<T>& e,
                      const Tensor<T>& w) {
  Tensor<T> gain = ops::relu(tape, ops::mul_rowwise(tape, w, e));
  return ops::scale_channel_groups(tape, f, gain);
}

template <typename T>
LfaState<T> LfaState<T>::make(const LfaConfig& cfg) {
  cfg.validate();
  LfaState st;
  st.cfg = cfg;
  st.high.mask = st.initial_high();
  st.low.mask = st.initial_low();
  st.high.weights = Tensor<T>::full({cfg.groups}, T(1), true);
  st.low.weights = Tensor<T>::full({cfg.groups}, T(1), true);
  return st;
}

template <typename T>
Tensor<T> LfaState<T>::initial_high() const {
  const std::size_t copies = cfg.mask_mode == MaskMode::kPerGroup ? cfg.groups : 0;
  return init_high_mask(distance_matrix<T>(cfg.height, cfg.width),
                        static_cast<T>(cfg.alpha), copies);
}

template <typename T>
Tensor<T> LfaState<T>::initial_low() const {
  const std::size_t copies = cfg.mask_mode == MaskMode::kPerGroup ? cfg.groups : 0;
  return init_low_mask(distance_matrix<T>(cfg.height, cfg.width),
                       static_cast<T>(cfg.alpha), copies);
}

template <typename T>
LfaOutput<T> lfa_forward(Tape<T>* tape, const Tensor<T>& f_rich,
                         const Tensor<T>& f_poor, LfaState<T>& state,
                         LfaBypass bypass) {
  const LfaConfig& cfg = state.cfg;
  for (const Tensor<T>* f : {&f_rich, &f_poor})
    if (f->rank() != 4 || f->dim(1) != cfg.channels || f->dim(2) != cfg.height ||
        f->dim(3) != cfg.width)
      throw DimensionError("lfa: features " + shape_str(f->shape()) +
                           " do not match configured [B," +
                           std::to_string(cfg.channels) + "," +
                           std::to_string(cfg.height) + "," +
                           std::to_string(cfg.width) + "]");
  LfaOutput<T> out;
  auto branch = [&](const Tensor<T>& f, LfaBranch<T>& p, bool skip,
                    Tensor<T>& y, Tensor<T>& e) {
    if (skip) {
      y = f;
      return;
    }
    e = group_energy(tape, mask_spectrum(tape, f, p.mask), cfg.groups,
                     cfg.energy_norm);
    y = recalibrate(tape, f, e, p.weights);
  };
  branch(f_rich, state.high, bypass.high, out.rich, out.energy_rich);
  branch(f_poor, state.low, bypass.low, out.poor, out.energy_poor);
  return out;
}

#define S2F_INSTANTIATE_LFA(T)                                                  \
  template Tensor<T> distance_matrix<T>(std::size_t, std::size_t);            \
  template Tensor<T> init_high_mask<T>(const Tensor<T>&, T, std::size_t);     \
  template Tensor<T> init_low_mask<T>(const Tensor<T>&, T, std::size_t);      \
  template ComplexTensor<T> mask_spectrum<T>(Tape<T>*, const Tensor<T>&,      \
                                             const Tensor<T>&);               \
  template Tensor<T> group_energy<T>(Tape<T>*, const ComplexTensor<T>&,       \
                                     std::size_t, bool);                      \
  template Tensor<T> recalibrate<T>(Tape<T>*, const Tensor<T>&,               \
                                    const Tensor<T>&, const Tensor<T>&);      \
  template struct LfaState<T>;                                                \
  template LfaOutput<T> lfa_forward<T>(Tape<T>*, const Tensor<T>&,            \
                                       const Tensor<T>&, LfaState<T>&,        \
                                       LfaBypass);

S2F_INSTANTIATE_LFA(float)
S2F_INSTANTIATE_LFA(double)

}  // namespace s2f::lfa
