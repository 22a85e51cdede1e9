#pragma once

#include <functional>
#include <vector>

#include "flightpred/nn/tensor.hpp"

namespace flightpred::nn {

using ScalarFunction = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compares reverse-mode gradients of a scalar function against five-point
/// differences. Returns max over all input coordinates of
/// |analytic - numeric| / max(1e-6 max(1, |f|), |analytic| + |numeric|); the
/// floor tracks the roundoff of f itself.
/// Input values are copied; the caller's tensors are never modified.
double finite_diff_gradcheck(const ScalarFunction& fn, const std::vector<Tensor>& inputs, double eps = 1e-4);

/// Same, but each coordinate keeps its best agreement over `steps`. Large
/// steps beat roundoff, small ones keep the stencil off ReLU kinks; a wrong
/// derivative disagrees at every step.
double finite_diff_gradcheck(const ScalarFunction& fn, const std::vector<Tensor>& inputs,
                             const std::vector<double>& steps);

}  // namespace flightpred::nn
