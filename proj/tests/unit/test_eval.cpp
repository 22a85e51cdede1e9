#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "flightpred/error.hpp"
#include "flightpred/eval/kalman.hpp"
#include "flightpred/eval/metrics.hpp"

using namespace flightpred;
using namespace flightpred::eval;

namespace {

std::vector<GeoPoint> base_track(std::size_t n) {
  std::vector<GeoPoint> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({28.0 + 0.01 * static_cast<double>(i), -81.0, 1000.0});
  return t;
}

std::vector<GeoPoint> alt_offsets(std::vector<GeoPoint> t, const std::vector<double>& off) {
  for (std::size_t i = 0; i < t.size(); ++i) t[i].alt += off[i];
  return t;
}

}  // namespace

TEST(Metrics, AdeHandCases) {
  const auto truth = base_track(2);
  EXPECT_EQ(ade(truth, truth), 0.0);
  EXPECT_EQ(ade(alt_offsets(truth, {100.0, 100.0}), truth), 100.0);
  EXPECT_EQ(ade(alt_offsets(truth, {0.0, 100.0}), truth), 50.0);
}

TEST(Metrics, AdeHorizontalOffsetUsesHaversine) {
  const auto truth = base_track(2);
  std::vector<GeoPoint> pred = {destination(truth[0], 90.0, 300.0), destination(truth[1], 0.0, 100.0)};
  EXPECT_NEAR(ade(pred, truth), 200.0, 1e-6);
}

TEST(Metrics, FdeUsesFinalStepOnly) {
  const auto truth = base_track(2);
  EXPECT_EQ(fde(alt_offsets(truth, {500.0, 100.0}), truth), 100.0);
  EXPECT_EQ(fde(alt_offsets(truth, {500.0, 0.0}), truth), 0.0);
  const auto one = base_track(1);
  const auto p = alt_offsets(one, {37.0});
  EXPECT_EQ(fde(p, one), ade(p, one));
}

TEST(Metrics, MaeHandCases) {
  auto truth = base_track(3);
  EXPECT_EQ(mae_components(truth, truth).lat, 0.0);
  auto lon = truth;
  for (auto& p : lon) p.lon += 0.01;
  EXPECT_NEAR(mae_components(lon, truth).lon, 0.01, 1e-12);
  // Mixed: lat errors (0.02, -0.01, 0), lon (0, 0, 0.03), alt (10, -20, 30).
  auto mixed = truth;
  mixed[0].lat += 0.02;
  mixed[1].lat -= 0.01;
  mixed[2].lon += 0.03;
  mixed[0].alt += 10.0;
  mixed[1].alt -= 20.0;
  mixed[2].alt += 30.0;
  const auto m = mae_components(mixed, truth);
  EXPECT_NEAR(m.lat, 0.01, 1e-12);
  EXPECT_NEAR(m.lon, 0.01, 1e-12);
  EXPECT_NEAR(m.alt, 20.0, 1e-12);
}

TEST(Metrics, MaeLongitudeWrapsAntimeridian) {
  std::vector<GeoPoint> truth = {{0.0, 179.99, 0.0}}, pred = {{0.0, -179.99, 0.0}};
  EXPECT_NEAR(mae_components(pred, truth).lon, 0.02, 1e-9);
}

TEST(Metrics, Errors) {
  const auto a = base_track(2), b = base_track(3);
  EXPECT_THROW(ade(a, b), InvalidArgument);
  EXPECT_THROW(fde({}, {}), InvalidArgument);
  EXPECT_THROW(mae_components(a, b), InvalidArgument);
}

TEST(Metrics, AltitudeTranslationInvariantAndSuffixProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.01), na(0.0, 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto truth = base_track(6);
    auto pred = truth;
    for (auto& p : pred) {
      p.lat += n(rng);
      p.lon += n(rng);
      p.alt += na(rng);
    }
    auto shift = [](std::vector<GeoPoint> v) {
      for (auto& p : v) p.alt += 1234.5;
      return v;
    };
    EXPECT_NEAR(ade(shift(pred), shift(truth)), ade(pred, truth), 1e-9);
    EXPECT_NEAR(fde(shift(pred), shift(truth)), fde(pred, truth), 1e-9);
    EXPECT_NEAR(mae_components(shift(pred), shift(truth)).alt, mae_components(pred, truth).alt, 1e-9);
    EXPECT_EQ(fde(pred, truth), ade({pred.back()}, {truth.back()}));
    EXPECT_GT(ade(pred, truth), 0.0);
  }
}

TEST(Metrics, AccumulatorAndReports) {
  const auto truth = base_track(2);
  MetricsAccumulator acc("oracle");
  acc.add(truth, truth);
  acc.add(alt_offsets(truth, {0.0, 100.0}), truth);
  const auto r = acc.report();
  EXPECT_EQ(r.n_trajectories, 2u);
  EXPECT_EQ(r.horizon, 2u);
  EXPECT_EQ(r.ade, 25.0);
  EXPECT_EQ(r.fde, 50.0);
  std::ostringstream csv, txt;
  write_report_csv(csv, {r});
  write_report_text(txt, {r});
  EXPECT_EQ(csv.str(), "model,ade_m,fde_m,mae_lat_deg,mae_lon_deg,mae_alt_m,n_trajectories,horizon\n"
                       "oracle,25,50,0,0,25,2,2\n");
  EXPECT_NE(txt.str().find("oracle"), std::string::npos);
}

namespace {

GeoPoint poly_point(double k, double a_lat, double a_lon, double a_alt) {
  return {28.0 + 0.004 * k + a_lat * k * k, -81.0 + 0.003 * k + a_lon * k * k, 2000.0 + 20.0 * k + a_alt * k * k};
}

}  // namespace

TEST(Kalman, ConstantVelocityExact) {
  std::vector<GeoPoint> obs, truth;
  for (int k = 0; k < 18; ++k) obs.push_back(poly_point(k, 0, 0, 0));
  for (int k = 18; k < 48; ++k) truth.push_back(poly_point(k, 0, 0, 0));
  const auto pred = kalman_baseline(obs, 30, KalmanMode::constant_speed);
  ASSERT_EQ(pred.size(), 30u);
  for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_LT(distance_3d(pred[i], truth[i]), 1e-6);
}

TEST(Kalman, ConstantAccelerationExact) {
  std::vector<GeoPoint> obs, truth;
  for (int k = 0; k < 18; ++k) obs.push_back(poly_point(k, 2e-5, -1e-5, 0.5));
  for (int k = 18; k < 48; ++k) truth.push_back(poly_point(k, 2e-5, -1e-5, 0.5));
  const auto pred = kalman_baseline(obs, 30, KalmanMode::linear_accel);
  for (std::size_t i = 0; i < pred.size(); ++i) EXPECT_LT(distance_3d(pred[i], truth[i]), 1e-6);
}

TEST(Kalman, NoisyTrackBeatsLastVelocity) {
  double kf = 0.0, lv = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 50.0);
    std::vector<GeoPoint> obs, truth;
    for (int k = 0; k < 18; ++k) {
      GeoPoint p = poly_point(k, 0, 0, 0);
      p = destination(p, 0.0, noise(rng));
      p = destination(p, 90.0, noise(rng));
      p.alt += noise(rng);
      obs.push_back(p);
    }
    for (int k = 18; k < 48; ++k) truth.push_back(poly_point(k, 0, 0, 0));
    kf += ade(kalman_baseline(obs, 30, KalmanMode::constant_speed), truth);
    lv += ade(last_velocity_baseline(obs, 30), truth);
  }
  EXPECT_LT(kf, lv);
}

TEST(Kalman, Errors) {
  const auto two = base_track(2);
  EXPECT_THROW(kalman_baseline(two, 5, KalmanMode::linear_accel), InvalidArgument);
  EXPECT_THROW(kalman_baseline(base_track(4), 0, KalmanMode::constant_speed), InvalidArgument);
}
