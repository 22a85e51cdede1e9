#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "flightpred/nn/tensor.hpp"

namespace testutil {

inline flightpred::nn::Tensor random_tensor(flightpred::nn::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                                            double hi = 1.0, bool requires_grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(flightpred::nn::element_count(shape));
  for (auto& x : v) x = u(rng);
  return flightpred::nn::Tensor::from(std::move(shape), std::move(v), requires_grad);
}

// Explicit 3x3 inverse and determinant by cofactors.
inline double det3(const double m[3][3]) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline void inv3(const double m[3][3], double out[3][3]) {
  const double d = det3(m);
  out[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  out[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  out[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  out[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  out[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  out[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  out[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  out[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  out[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
}

// -log N(x; mu, Sigma) through an explicit covariance inverse.
inline double brute_force_nll(const double x[3], const double mu[3], const double sigma[3], const double rho[3]) {
  const double r[3][3] = {{1.0, rho[0], rho[1]}, {rho[0], 1.0, rho[2]}, {rho[1], rho[2], 1.0}};
  double cov[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov[i][j] = r[i][j] * sigma[i] * sigma[j];
  double inv[3][3];
  inv3(cov, inv);
  double d[3];
  for (int i = 0; i < 3; ++i) d[i] = x[i] - mu[i];
  double q = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q += d[i] * inv[i][j] * d[j];
  const double two_pi = 2.0 * 3.14159265358979323846;
  return 0.5 * (3.0 * std::log(two_pi) + std::log(det3(cov)) + q);
}

}  // namespace testutil
