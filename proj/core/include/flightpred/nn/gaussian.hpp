#pragma once

#include <array>
#include <span>

#include "flightpred/nn/parameters.hpp"
#include "flightpred/nn/tensor.hpp"

namespace flightpred::nn {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Clip applied to correlations after the tanh link.
inline constexpr double kRhoClip = 0.999;
/// Shrink factor and maximum shrink count of the positive-definiteness repair.
inline constexpr double kRhoShrink = 0.9;
inline constexpr int kRhoMaxShrinks = 20;

/// Trivariate Gaussian over (lat, lon, alt) or any affine image of it.
/// rho holds the pairwise correlations (rho_xy, rho_xz, rho_yz).
struct GaussianParams3 {
  Vec3 mu{};
  Vec3 sigma{1.0, 1.0, 1.0};
  Vec3 rho{};

  Mat3 correlation() const;
  Mat3 covariance() const;
  /// sigma > 0, |rho| < 1 and a successful Cholesky factorization.
  bool valid() const;
};

/// Lower Cholesky factor; returns false when the matrix is not positive definite.
bool cholesky3(const Mat3& a, Mat3& lower);

/// Differentiable head output. Tensors are 3-vectors.
struct GaussianHead {
  Tensor mu;
  Tensor sigma;
  Tensor rho;

  GaussianParams3 values() const;
};

/// Splits 9 raw outputs into mu (identity), sigma = exp(raw), rho = tanh(raw)
/// followed by the clip/shrink positive-definiteness repair.
GaussianHead gaussian3_from_raw(const Tensor& raw9);
/// raw9 = W_p h (+ b_p when given).
GaussianHead gaussian3_from_linear(const Tensor& h, const Tensor& w_p);
GaussianHead gaussian3_from_linear(const Tensor& h, const Tensor& w_p, const Tensor& b_p);

/// Correlation repair on plain values: clip to +/-0.999, then shrink by 0.9 until PD.
/// Returns the multiplier applied after clipping.
double repair_correlations(Vec3& rho);

/// -log N(target; mu, Sigma(sigma, rho)) as a differentiable scalar.
Tensor gaussian3_nll(std::span<const double, 3> target, const GaussianHead& p);
double gaussian3_nll(std::span<const double, 3> target, const GaussianParams3& p);

/// mu + L z with L = chol(Sigma) and z ~ N(0, I) drawn from `rng`.
Vec3 gaussian3_sample(const GaussianParams3& p, Rng& rng);

}  // namespace flightpred::nn
