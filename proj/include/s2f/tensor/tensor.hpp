// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace s2f {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Raised by any op whose operands have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// When on, every op output is scanned for NaN/Inf (default: on in debug
/// builds, off in release; tests switch it on).
void set_finite_checks(bool on);
bool finite_checks();

/// Dense row-major array with shared-handle semantics: copying a Tensor
/// aliases the same storage, as autodiff handles do. Use clone() for a deep
/// copy.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<T> values,
                     bool requires_grad = false);

  bool defined() const { return static_cast<bool>(s_); }
  const Shape& shape() const { return s_->shape; }
  std::size_t dim(std::size_t i) const { return s_->shape.at(i); }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t numel() const { return s_->data.size(); }

  std::span<T> data() { return s_->data; }
  std::span<const T> data() const { return s_->data; }
  T* ptr() { return s_->data.data(); }
  const T* ptr() const { return s_->data.data(); }
  T& operator[](std::size_t i) { return s_->data[i]; }
  const T& operator[](std::size_t i) const { return s_->data[i]; }

  bool requires_grad() const { return s_->requires_grad; }
  void set_requires_grad(bool on) { s_->requires_grad = on; }

  bool has_grad() const { return !s_->grad.empty(); }
  /// Gradient buffer, allocated (zeroed) on first access. Const because the
  /// handle, not the shared storage, is const.
  std::span<T> grad() const;
  void zero_grad();
  void drop_grad() { s_->grad.clear(); }

  Tensor clone() const;
  /// Deep copy with a new shape of equal element count (not tracked by any
  /// tape; use ops::reshape inside a graph).
  Tensor reshaped(Shape shape) const;

  bool same_storage(const Tensor& o) const { return s_ == o.s_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

/// Complex array stored as split real/imaginary planes.
template <typename T>
class ComplexTensor {
 public:
  ComplexTensor() = default;
  static ComplexTensor zeros(Shape shape, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(s_); }
  const Shape& shape() const { return s_->shape; }
  std::size_t dim(std::size_t i) const { return s_->shape.at(i); }
  std::size_t numel() const { return s_->re.size(); }

  std::span<T> re() { return s_->re; }
  std::span<T> im() { return s_->im; }
  std::span<const T> re() const { return s_->re; }
  std::span<const T> im() const { return s_->im; }

  bool requires_grad() const { return s_->requires_grad; }
  void set_requires_grad(bool on) { s_->requires_grad = on; }
  /// dL/dre and dL/dim, allocated on first access.
  std::span<T> grad_re() const;
  std::span<T> grad_im() const;
  bool has_grad() const { return !s_->grad_re.empty(); }

 private:
  struct Storage {
    Shape shape;
    std::vector<T> re, im;
    std::vector<T> grad_re, grad_im;
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> s_;
};

/// Ordered record of differentiable ops. backward() replays the recorded
/// adjoint closures in exact reverse order, then clears the record.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> backward_fn) {
    ops_.push_back(std::move(backward_fn));
  }
  std::size_t size() const { return ops_.size(); }
  void clear() { ops_.clear(); }

  /// Seeds dloss = 1 and accumulates gradients into every requires_grad
  /// tensor reachable from the loss. Throws if loss is not a scalar.
  void backward(Tensor<T>& loss);

 private:
  std::vector<std::function<void()>> ops_;
};

namespace detail {
template <typename T>
void check_finite(std::span<const T> values, const char* op);
}  // namespace detail

}  // namespace s2f
