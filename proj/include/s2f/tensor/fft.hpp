// Copyright 2026 The s2fnet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "s2f/tensor/tensor.hpp"

// 2-D discrete Fourier transforms over the last two dimensions.
//
// Normalization is fixed: the forward transform is unnormalized,
//   X[u,v] = sum_{y,x} x[y,x] * exp(-2*pi*i*(u*y/H + v*x/W)),
// and the inverse carries the full 1/(H*W) factor. Radix-2 for power-of-two
// extents, direct O(n^2) per-axis DFT otherwise.
namespace s2f::fft {

/// Forward DFT of a real tensor [..., H, W]. Differentiable: the input
/// gradient is the real part of the unnormalized adjoint transform.
template <typename T>
ComplexTensor<T> fft2(Tape<T>* tape, const Tensor<T>& x);

/// Forward DFT of a complex tensor (not recorded on any tape).
template <typename T>
ComplexTensor<T> fft2(const ComplexTensor<T>& z);

/// Inverse DFT with 1/(H*W) normalization (not recorded on any tape).
template <typename T>
ComplexTensor<T> ifft2(const ComplexTensor<T>& z);

/// Cyclic roll by (floor(H/2), floor(W/2)) so DC lands at the center.
/// The adjoint is the inverse roll.
template <typename T>
ComplexTensor<T> fftshift(Tape<T>* tape, const ComplexTensor<T>& z);

/// Inverse of fftshift: roll by (-floor(H/2), -floor(W/2)).
template <typename T>
ComplexTensor<T> ifftshift(const ComplexTensor<T>& z);

/// z * s where s is a real tensor of shape [H,W] (broadcast over all leading
/// dims) or [G,H,W] for z of shape [B,C,H,W] with C divisible by G (channel
/// block c / (C/G) uses slice s[g]).
template <typename T>
ComplexTensor<T> mul_real(Tape<T>* tape, const ComplexTensor<T>& z,
                          const Tensor<T>& s);

/// Elementwise magnitude sqrt(re^2 + im^2). The subgradient at 0 is 0.
template <typename T>
Tensor<T> abs(Tape<T>* tape, const ComplexTensor<T>& z);

/// In-place 1-D transform helpers, exposed for the analysis tools.
template <typename T>
void transform_1d(T* re, T* im, std::size_t n, std::size_t stride,
                  bool inverse);

}  // namespace s2f::fft
