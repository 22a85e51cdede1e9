#include "flightpred/nn/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flightpred/error.hpp"
#include "flightpred/nn/ops.hpp"

namespace flightpred::nn {

namespace {

Mat3 correlation_from(const Vec3& rho) {
  return Mat3{{{1.0, rho[0], rho[1]}, {rho[0], 1.0, rho[2]}, {rho[1], rho[2], 1.0}}};
}

// Solves L y = b (forward) then L^T x = y (backward).
Vec3 cholesky_solve(const Mat3& L, const Vec3& b) {
  Vec3 y{};
  for (int i = 0; i < 3; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  Vec3 x{};
  for (int i = 2; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < 3; ++k) s -= L[k][i] * x[k];
    x[i] = s / L[i][i];
  }
  return x;
}

}  // namespace

bool cholesky3(const Mat3& a, Mat3& lower) {
  lower = Mat3{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= lower[i][k] * lower[j][k];
      if (i == j) {
        if (!(s > 0.0)) return false;
        lower[i][i] = std::sqrt(s);
      } else {
        lower[i][j] = s / lower[j][j];
      }
    }
  }
  return true;
}

Mat3 GaussianParams3::correlation() const { return correlation_from(rho); }

Mat3 GaussianParams3::covariance() const {
  Mat3 r = correlation();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] *= sigma[i] * sigma[j];
  return r;
}

bool GaussianParams3::valid() const {
  for (int i = 0; i < 3; ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i]) || !std::isfinite(mu[i])) return false;
    if (!(std::abs(rho[i]) < 1.0)) return false;
  }
  Mat3 l;
  return cholesky3(correlation(), l);
}

GaussianParams3 GaussianHead::values() const {
  GaussianParams3 p;
  for (int i = 0; i < 3; ++i) {
    p.mu[i] = mu[i];
    p.sigma[i] = sigma[i];
    p.rho[i] = rho[i];
  }
  return p;
}

double repair_correlations(Vec3& rho) {
  for (double& r : rho) r = std::clamp(r, -kRhoClip, kRhoClip);
  double factor = 1.0;
  Mat3 l;
  for (int k = 0; k < kRhoMaxShrinks && !cholesky3(correlation_from(rho), l); ++k) {
    for (double& r : rho) r *= kRhoShrink;
    factor *= kRhoShrink;
  }
  return factor;
}

namespace {

Tensor repair_rho(const Tensor& rho_raw) {
  Vec3 rho{rho_raw[0], rho_raw[1], rho_raw[2]};
  Vec3 pass{};
  for (int i = 0; i < 3; ++i) pass[i] = std::abs(rho[i]) <= kRhoClip ? 1.0 : 0.0;
  const double factor = repair_correlations(rho);
  return detail::make_result(
      Shape{3}, {rho[0], rho[1], rho[2]}, {rho_raw},
      [factor, pass](detail::Node& self) {
        detail::Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (int i = 0; i < 3; ++i) g[i] += self.grad[i] * factor * pass[i];
      },
      "repair_rho");
}

}  // namespace

GaussianHead gaussian3_from_raw(const Tensor& raw9) {
  if (raw9.size() != 9 || raw9.rank() != 1) throw InvalidArgument("gaussian head expects 9 raw outputs");
  GaussianHead head;
  head.mu = slice(raw9, 0, 3);
  head.sigma = nn::exp(slice(raw9, 3, 3));
  head.rho = repair_rho(nn::tanh(slice(raw9, 6, 3)));
  return head;
}

GaussianHead gaussian3_from_linear(const Tensor& h, const Tensor& w_p) { return gaussian3_from_raw(matvec(w_p, h)); }

GaussianHead gaussian3_from_linear(const Tensor& h, const Tensor& w_p, const Tensor& b_p) {
  return gaussian3_from_raw(linear(w_p, h, b_p));
}

double gaussian3_nll(std::span<const double, 3> target, const GaussianParams3& p) {
  Mat3 L;
  if (!cholesky3(p.correlation(), L)) throw NumericError("gaussian3_nll: covariance factorization failed");
  Vec3 z{};
  double log_sigma = 0.0;
  for (int i = 0; i < 3; ++i) {
    z[i] = (target[i] - p.mu[i]) / p.sigma[i];
    log_sigma += std::log(p.sigma[i]);
  }
  const Vec3 w = cholesky_solve(L, z);
  double quad = 0.0;
  for (int i = 0; i < 3; ++i) quad += z[i] * w[i];
  const double log_det_r = 2.0 * (std::log(L[0][0]) + std::log(L[1][1]) + std::log(L[2][2]));
  return 1.5 * std::log(2.0 * std::numbers::pi) + log_sigma + 0.5 * log_det_r + 0.5 * quad;
}

Tensor gaussian3_nll(std::span<const double, 3> target, const GaussianHead& head) {
  const GaussianParams3 p = head.values();
  Mat3 L;
  if (!cholesky3(p.correlation(), L)) throw NumericError("gaussian3_nll: covariance factorization failed");
  const Vec3 t{target[0], target[1], target[2]};
  const double value = gaussian3_nll(target, p);

  Vec3 z{};
  for (int i = 0; i < 3; ++i) z[i] = (t[i] - p.mu[i]) / p.sigma[i];
  const Vec3 w = cholesky_solve(L, z);
  // Columns of R^{-1}.
  Mat3 rinv{};
  for (int j = 0; j < 3; ++j) {
    Vec3 e{};
    e[j] = 1.0;
    const Vec3 col = cholesky_solve(L, e);
    for (int i = 0; i < 3; ++i) rinv[i][j] = col[i];
  }

  return detail::make_result(
      Shape{1}, {value}, {head.mu, head.sigma, head.rho},
      [p, z, w, rinv](detail::Node& self) {
        const double g = self.grad[0];
        detail::Node& pm = *self.parents[0];
        detail::Node& ps = *self.parents[1];
        detail::Node& pr = *self.parents[2];
        if (pm.requires_grad) {
          auto& gm = pm.ensure_grad();
          for (int i = 0; i < 3; ++i) gm[i] += g * (-w[i] / p.sigma[i]);
        }
        if (ps.requires_grad) {
          auto& gs = ps.ensure_grad();
          for (int i = 0; i < 3; ++i) gs[i] += g * (1.0 - w[i] * z[i]) / p.sigma[i];
        }
        if (pr.requires_grad) {
          auto& gr = pr.ensure_grad();
          constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
          for (int k = 0; k < 3; ++k) {
            const int a = pairs[k][0], b = pairs[k][1];
            gr[k] += g * (rinv[a][b] - w[a] * w[b]);
          }
        }
      },
      "gaussian3_nll");
}

Vec3 gaussian3_sample(const GaussianParams3& p, Rng& rng) {
  // chol(D R D) = D chol(R); factoring R keeps tiny sigmas from underflowing.
  Mat3 lr;
  if (!cholesky3(p.correlation(), lr)) throw NumericError("gaussian3_sample: invalid correlation");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 z{};
  for (double& zi : z) zi = normal(rng);
  Vec3 out = p.mu;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) out[i] += p.sigma[i] * lr[i][j] * z[j];
  return out;
}

}  // namespace flightpred::nn
