#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flightpred/nn/tensor.hpp"

// Differentiable primitives. Every op validates shapes (InvalidArgument),
// rejects non-finite results (NumericError) and never mutates its inputs.
namespace flightpred::nn {

// Elementwise binary ops on identically shaped tensors.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
// Affine map with per-element constants: out[i] = a[i] * factor[i] + offset[i].
Tensor affine(const Tensor& a, std::span<const double> factor, std::span<const double> offset);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sin(const Tensor& a);
Tensor cos(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor asin(const Tensor& a);
Tensor square(const Tensor& a);
// asin(sqrt(a))^2 and asin(sqrt(a)) / sqrt(a) for a in [0, 1). Both are smooth at
// a = 0, where the composed ops would produce an infinite gradient.
Tensor asin_sqrt_squared(const Tensor& a);
Tensor asin_sqrt_ratio(const Tensor& a);
// Elementwise atan2(y, x) in radians.
Tensor atan2(const Tensor& y, const Tensor& x);
// Wraps angle values in degrees to (-180, 180]; gradient passes through unchanged.
Tensor wrap_degrees(const Tensor& a);
// Clamps to [lo, hi]; gradient is zero where clamped.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor dot(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& a);
Tensor cumsum(const Tensor& a);

/// y = W x for W of shape [rows, cols] and x of length cols.
Tensor matvec(const Tensor& w, const Tensor& x);
/// y = W^T x for W of shape [rows, cols] and x of length rows.
Tensor matvec_transposed(const Tensor& w, const Tensor& x);
/// y = W x + b.
Tensor linear(const Tensor& w, const Tensor& x, const Tensor& b);

Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
Tensor slice(const Tensor& a, std::size_t offset, std::size_t length);
/// out[i] = a[indices[i]]; repeated indices accumulate on backward.
Tensor gather(const Tensor& a, std::vector<std::size_t> indices);
/// Stacks equally sized vectors as rows of a [m, n] matrix.
Tensor stack(std::span<const Tensor> rows);
Tensor reshape(const Tensor& a, Shape shape);

/// Cross-correlation of a [C, H, W] field with kernels [O, C, k, k] plus bias [O].
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, std::size_t stride,
              std::size_t padding);

std::size_t conv2d_output_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding);

}  // namespace flightpred::nn
