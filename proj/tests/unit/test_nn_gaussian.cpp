#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flightpred/error.hpp"
#include "flightpred/nn/gaussian.hpp"
#include "flightpred/nn/gradcheck.hpp"
#include "flightpred/nn/ops.hpp"
#include "test_util.hpp"

using namespace flightpred;
using namespace flightpred::nn;
using testutil::random_tensor;

TEST(GaussianHead, ZeroWeightsGiveStandardParams) {
  auto head = gaussian3_from_linear(Tensor::vector({0.3, -1.0}), Tensor::zeros({9, 2}));
  auto p = head.values();
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(p.mu[i], 0.0);
    EXPECT_EQ(p.sigma[i], 1.0);
    EXPECT_EQ(p.rho[i], 0.0);
  }
}

TEST(GaussianHead, SigmaLinkIsExp) {
  auto head = gaussian3_from_raw(Tensor::vector({0, 0, 0, std::log(2.0), 0, 0, 0, 0, 0}));
  EXPECT_NEAR(head.values().sigma[0], 2.0, 1e-15);
}

TEST(GaussianHead, LargeRhoRawIsClipped) {
  auto head = gaussian3_from_raw(Tensor::vector({0, 0, 0, 0, 0, 0, 40.0, 0, 0}));
  const auto p = head.values();
  EXPECT_NEAR(std::abs(p.rho[0]), 0.999, 1e-15);
  EXPECT_TRUE(p.valid());
}

TEST(GaussianHead, RepairShrinksUntilPositiveDefinite) {
  Vec3 rho{0.99, 0.99, -0.99};
  const double factor = repair_correlations(rho);
  EXPECT_LT(factor, 1.0);
  GaussianParams3 p;
  p.rho = rho;
  EXPECT_TRUE(p.valid());
  // Geometric shrink by 0.9 from the clipped value.
  const double k = std::round(std::log(factor) / std::log(0.9));
  EXPECT_NEAR(factor, std::pow(0.9, k), 1e-12);
}

TEST(GaussianNll, StandardAtMode) {
  GaussianParams3 p;
  const double t[3] = {0, 0, 0};
  EXPECT_NEAR(gaussian3_nll(std::span<const double, 3>(t), p), 1.5 * std::log(2.0 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(1.5 * std::log(2.0 * std::numbers::pi), 2.756815, 1e-6);
}

TEST(GaussianNll, ScalingSigmaAddsLogDet) {
  GaussianParams3 p;
  p.mu = {1.0, -2.0, 3.0};
  const double t[3] = {1.0, -2.0, 3.0};
  const double base = gaussian3_nll(std::span<const double, 3>(t), p);
  p.sigma = {4.0, 4.0, 4.0};
  EXPECT_NEAR(gaussian3_nll(std::span<const double, 3>(t), p) - base, 3.0 * std::log(4.0), 1e-12);
}

TEST(GaussianNll, MatchesExplicitInverseOracle) {
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GaussianParams3 p;
    for (int i = 0; i < 3; ++i) {
      p.mu[i] = u(rng);
      p.sigma[i] = std::exp(u(rng));
      p.rho[i] = 0.6 * u(rng);
    }
    if (!p.valid()) continue;
    const double t[3] = {u(rng) * 2, u(rng) * 2, u(rng) * 2};
    const double oracle = testutil::brute_force_nll(t, p.mu.data(), p.sigma.data(), p.rho.data());
    EXPECT_NEAR(gaussian3_nll(std::span<const double, 3>(t), p), oracle, 1e-9);
  }
}

TEST(GaussianNll, GradcheckAllRawParams) {
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Tensor raw = random_tensor({9}, rng, -0.8, 0.8);
    const double t[3] = {0.3, -0.5, 0.9};
    auto fn = [&](const std::vector<Tensor>& v) {
      return gaussian3_nll(std::span<const double, 3>(t), gaussian3_from_raw(v[0]));
    };
    EXPECT_LT(finite_diff_gradcheck(fn, {raw}), 1e-4);
  }
}

TEST(GaussianSample, DegenerateSigmaReturnsMean) {
  GaussianParams3 p;
  p.mu = {28.5, -81.3, 1200.0};
  p.sigma = {1e-12, 1e-12, 1e-12};
  Rng rng(7);
  auto s = gaussian3_sample(p, rng);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s[i], p.mu[i], 1e-6);
}

TEST(GaussianSample, MomentsMatch) {
  GaussianParams3 p;
  p.mu = {1.0, -2.0, 5.0};
  p.sigma = {0.5, 2.0, 3.0};
  p.rho = {0.6, -0.3, 0.2};
  Rng rng(11);
  const int n = 10000;
  double sum[3] = {}, sq[3] = {}, xy = 0.0;
  for (int k = 0; k < n; ++k) {
    auto s = gaussian3_sample(p, rng);
    for (int i = 0; i < 3; ++i) {
      sum[i] += s[i];
      sq[i] += s[i] * s[i];
    }
    xy += s[0] * s[1];
  }
  double mean[3], sd[3];
  for (int i = 0; i < 3; ++i) {
    mean[i] = sum[i] / n;
    sd[i] = std::sqrt(sq[i] / n - mean[i] * mean[i]);
    EXPECT_LT(std::abs(mean[i] - p.mu[i]), 3.0 * p.sigma[i] / 100.0);
  }
  const double corr = (xy / n - mean[0] * mean[1]) / (sd[0] * sd[1]);
  EXPECT_LT(std::abs(corr - p.rho[0]), 0.05);
}

TEST(GaussianSample, BitReproducible) {
  GaussianParams3 p;
  p.rho = {0.2, 0.1, -0.4};
  Rng a(99), b(99);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(gaussian3_sample(p, a), gaussian3_sample(p, b));
}
