// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#include "s2f/tensor/tensor.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>

namespace s2f {
namespace {

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void set_finite_checks(bool on) { g_finite_checks = on; }
bool finite_checks() { return g_finite_checks; }

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->data.assign(shape_numel(shape), value);
  t.s_->shape = std::move(shape);
  t.s_->requires_grad = requires_grad;
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values,
                          bool requires_grad) {
  if (shape_numel(shape) != values.size())
    throw DimensionError("Tensor::from: shape " + shape_str(shape) +
                         " does not match " + std::to_string(values.size()) +
                         " values");
  Tensor t;
  t.s_ = std::make_shared<Storage>();
  t.s_->shape = std::move(shape);
  t.s_->data = std::move(values);
  t.s_->requires_grad = requires_grad;
  return t;
}

template <typename T>
std::span<T> Tensor<T>::grad() const {
  if (s_->grad.size() != s_->data.size()) s_->grad.assign(s_->data.size(), T(0));
  return s_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (!s_->grad.empty()) std::fill(s_->grad.begin(), s_->grad.end(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return from(s_->shape, s_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel())
    throw DimensionError("reshape: " + shape_str(s_->shape) + " -> " +
                         shape_str(shape));
  Tensor t = *this;
  t.s_ = std::make_shared<Storage>(*s_);
  t.s_->shape = std::move(shape);
  return t;
}

template <typename T>
ComplexTensor<T> ComplexTensor<T>::zeros(Shape shape, bool requires_grad) {
  ComplexTensor z;
  z.s_ = std::make_shared<Storage>();
  const std::size_t n = shape_numel(shape);
  z.s_->re.assign(n, T(0));
  z.s_->im.assign(n, T(0));
  z.s_->shape = std::move(shape);
  z.s_->requires_grad = requires_grad;
  return z;
}

template <typename T>
std::span<T> ComplexTensor<T>::grad_re() const {
  if (s_->grad_re.size() != s_->re.size()) s_->grad_re.assign(s_->re.size(), T(0));
  return s_->grad_re;
}

template <typename T>
std::span<T> ComplexTensor<T>::grad_im() const {
  if (s_->grad_im.size() != s_->im.size()) s_->grad_im.assign(s_->im.size(), T(0));
  return s_->grad_im;
}

template <typename T>
void Tape<T>::backward(Tensor<T>& loss) {
  if (loss.numel() != 1)
    throw DimensionError("backward: loss must be a scalar, got shape " +
                         shape_str(loss.shape()));
  if (!loss.requires_grad()) {
    ops_.clear();
    return;
  }
  loss.grad()[0] += T(1);
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  ops_.clear();
}

namespace detail {
template <typename T>
void check_finite(std::span<const T> values, const char* op) {
  if (!finite_checks()) return;
  for (const T v : values)
    if (!std::isfinite(v))
      throw std::domain_error(std::string("non-finite value produced by ") + op);
}
template void check_finite<float>(std::span<const float>, const char*);
template void check_finite<double>(std::span<const double>, const char*);
}  // namespace detail

template class Tensor<float>;
template class Tensor<double>;
template class ComplexTensor<float>;
template class ComplexTensor<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace s2f
