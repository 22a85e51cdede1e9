#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/error.hpp"

using namespace flightpred;
using namespace flightpred::constraints;
using phase::Phase;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Two-point takeoff track: first point at 500 m, TOC dh higher and dd away.
LabeledTrack climb_track(double dh, double dd, Phase ph = Phase::takeoff) {
  LabeledTrack t;
  t.phase = ph;
  const GeoPoint a{28.0, -81.0, 500.0};
  GeoPoint b = destination(a, 45.0, dd);
  b.alt = 500.0 + dh;
  t.points = {{28.0, -81.0, 100.0}, a, b};
  t.time_s = {0.0, 10.0, 20.0};
  // Approach: TOD first, then down through the floor.
  if (ph == Phase::approach) t.points = {b, a, GeoPoint{a.lat, a.lon, 100.0}};
  return t;
}

}  // namespace

TEST(Haversine, KnownDistance) {
  const GeoPoint a{28.43, -81.31, 0.0};
  const GeoPoint b{29.18, -81.06, 0.0};
  EXPECT_NEAR(haversine(a, b) / 1000.0, 86.8, 0.5);
  EXPECT_EQ(haversine(a, a), 0.0);
  EXPECT_EQ(haversine(a, b), haversine(b, a));
}

TEST(Haversine, TriangleInequality) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-80.0, 80.0), lon(-180.0, 179.999);
  for (int k = 0; k < 1000; ++k) {
    const GeoPoint a{lat(rng), lon(rng), 0}, b{lat(rng), lon(rng), 0}, c{lat(rng), lon(rng), 0};
    EXPECT_LE(haversine(a, c), (haversine(a, b) + haversine(b, c)) * (1.0 + 1e-6));
  }
}

TEST(Geo, BearingAndDestination) {
  const GeoPoint a{0.0, 0.0, 0.0};
  EXPECT_NEAR(initial_bearing(a, GeoPoint{0.0, 1.0, 0.0}), 90.0, 1e-9);
  EXPECT_EQ(initial_bearing(a, a), 0.0);
  const GeoPoint d = destination(GeoPoint{28.0, -81.0, 300.0}, 123.0, 25000.0);
  EXPECT_NEAR(haversine(GeoPoint{28.0, -81.0, 300.0}, d), 25000.0, 1e-6);
  EXPECT_EQ(d.alt, 300.0);
  EXPECT_EQ(wrap_angle_deg(-180.0), 180.0);
  EXPECT_NEAR(wrap_angle_deg(350.0), -10.0, 1e-12);
}

TEST(FitClimb, SingleFlightAtanPointThree) {
  auto fit = fit_climb_descend({climb_track(3000.0, 10000.0), climb_track(300.0, 10000.0, Phase::approach)});
  EXPECT_NEAR(fit.climb.max_deg, 16.70, 0.005);
  EXPECT_NEAR(fit.climb.max_deg, std::atan(0.3) * 180.0 / 3.14159265358979323846, 1e-9);
  EXPECT_NEAR(fit.descend.max_deg, std::atan(0.03) * 180.0 / 3.14159265358979323846, 1e-9);
}

TEST(FitClimb, MaxOverFlights) {
  const double d = 10000.0;
  auto fit = fit_climb_descend({climb_track(d * std::tan(5.0 * M_PI / 180.0), d),
                                climb_track(d * std::tan(12.0 * M_PI / 180.0), d),
                                climb_track(100.0, d, Phase::approach)});
  EXPECT_NEAR(fit.climb.max_deg, 12.0, 1e-9);
  EXPECT_EQ(fit.climb.flights_used, 2u);
}

TEST(FitClimb, LevelFlightIsZero) { EXPECT_NEAR(climb_angle_deg(climb_track(0.0, 8000.0)), 0.0, 1e-12); }

TEST(FitClimb, ZeroDistanceSkippedWithWarning) {
  std::vector<std::string> warnings;
  EXPECT_TRUE(std::isnan(climb_angle_deg(climb_track(500.0, 0.0), &warnings)));
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(FitClimb, NoQualifyingFlightsThrows) {
  EXPECT_THROW(fit_climb_descend({}), DataError);
  EXPECT_THROW(fit_climb_descend({climb_track(100.0, 1000.0)}), DataError);
}

TEST(FitClimb, Monotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dh(0.0, 3000.0);
  std::vector<LabeledTrack> tracks{climb_track(dh(rng), 9000.0), climb_track(dh(rng), 9000.0, Phase::approach)};
  auto prev = fit_climb_descend(tracks);
  for (int k = 0; k < 30; ++k) {
    tracks.push_back(climb_track(dh(rng), 9000.0, k % 2 ? Phase::approach : Phase::takeoff));
    auto cur = fit_climb_descend(tracks);
    EXPECT_GE(cur.climb.max_deg, prev.climb.max_deg);
    EXPECT_GE(cur.descend.max_deg, prev.descend.max_deg);
    prev = cur;
  }
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0}, 50.0), 2.5);
  EXPECT_DOUBLE_EQ(percentile({5.0}, 99.5), 5.0);
  EXPECT_TRUE(std::isnan(percentile({}, 50.0)));
}

TEST(FitRot, BankFormula) {
  EXPECT_NEAR(rate_of_turn_from_bank(30.0, 120.0), 1091.0 * std::tan(M_PI / 6.0) / 120.0, 1e-12);
  EXPECT_NEAR(rate_of_turn_from_bank(30.0, 120.0), 5.25, 0.005);
  EXPECT_EQ(rate_of_turn_from_bank(0.0, 120.0), 0.0);
}

TEST(FitRot, StraightLineIsZero) {
  LabeledTrack t;
  for (int i = 0; i < 20; ++i) {
    t.time_s.push_back(10.0 * i);
    t.points.push_back(destination(GeoPoint{28.0, -81.0, 0.0}, 70.0, 1500.0 * i));
    t.heading_deg.push_back(70.0);
  }
  auto fit = fit_rot({t});
  EXPECT_LT(fit.max_deg_s, 1e-6);
  EXPECT_FALSE(fit.from_bank);
}

TEST(FitRot, BankPathPreferred) {
  LabeledTrack t;
  t.time_s = {0.0, 10.0};
  t.points = {GeoPoint{28, -81, 0}, GeoPoint{28.01, -81, 0}};
  t.heading_deg = {0.0, 0.0};
  t.bank_deg = {30.0, 30.0};
  t.speed_kt = {120.0, 120.0};
  auto fit = fit_rot({t});
  EXPECT_TRUE(fit.from_bank);
  EXPECT_NEAR(fit.max_deg_s, rate_of_turn_from_bank(30.0, 120.0), 1e-12);
}

TEST(FitRot, NoHeadingDataThrows) {
  LabeledTrack t;
  t.time_s = {0.0};
  t.points = {GeoPoint{}};
  EXPECT_THROW(fit_rot({t}), DataError);
}

TEST(Check, IdenticalPointPasses) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  EXPECT_TRUE(check(p, 90.0, p, Phase::takeoff, {}, 10.0).pass);
}

TEST(Check, TwentyDegreeClimbFails) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  GeoPoint c = destination(p, 0.0, 1000.0);
  c.alt = p.alt + 1000.0 * std::tan(20.0 * M_PI / 180.0);
  ConstraintSet cs;
  cs.theta_c = 15.0;
  auto r = check(p, kNaN, c, Phase::takeoff, cs, 10.0);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.angle_deg, 20.0, 1e-6);
  EXPECT_NEAR(r.angle_excess, 5.0, 1e-6);
  EXPECT_NEAR(r.violation, 5.0 / 15.0, 1e-6);
  // Descending uses theta_d.
  c.alt = p.alt - 1000.0 * std::tan(10.0 * M_PI / 180.0);
  cs.theta_d = 9.0;
  EXPECT_FALSE(check(p, kNaN, c, Phase::approach, cs, 10.0).pass);
  cs.theta_d = 11.0;
  EXPECT_TRUE(check(p, kNaN, c, Phase::approach, cs, 10.0).pass);
}

TEST(Check, TurnRateAndVerticalJump) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  const GeoPoint c = destination(p, 90.0, 1000.0);
  ConstraintSet cs;
  cs.omega_rot = 3.0;
  auto r = check(p, 0.0, c, Phase::takeoff, cs, 10.0);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.turn_rate_deg_s, 9.0, 1e-6);
  GeoPoint up = p;
  up.alt += 10.0;
  auto j = check(p, kNaN, up, Phase::approach, cs, 10.0);
  EXPECT_FALSE(j.pass);
  EXPECT_TRUE(j.vertical_jump);
}

TEST(Check, EnRouteAlwaysPasses) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  GeoPoint up = p;
  up.alt += 5000.0;
  EXPECT_TRUE(check(p, 0.0, up, Phase::enroute, {}, 10.0).pass);
}

TEST(InferStep, TinySigmaAtPrevPassesFirstDraw) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  nn::GaussianParams3 d;
  d.mu = {p.lat, p.lon, p.alt};
  d.sigma = {1e-12, 1e-12, 1e-12};
  nn::Rng rng(0);
  auto r = infer_step(d, p, kNaN, Phase::takeoff, {}, 10.0, rng);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.samples_drawn, 1);
}

TEST(InferStep, FallbackIsMinimumViolationOverDraws) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  nn::GaussianParams3 d;
  // ~45 degree climb over ~1.1 km with moderate spread.
  d.mu = {p.lat + 0.01, p.lon, p.alt + 1100.0};
  d.sigma = {1e-4, 1e-4, 20.0};
  ConstraintSet cs;
  cs.max_resample = 25;
  nn::Rng rng(17);
  auto r = infer_step(d, p, kNaN, Phase::takeoff, cs, 10.0, rng);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.samples_drawn, 25);

  // Oracle: replay the same draws and pick the minimum violation.
  nn::Rng replay(17);
  double best = std::numeric_limits<double>::infinity();
  GeoPoint best_pt;
  for (int k = 0; k < 25; ++k) {
    auto s = nn::gaussian3_sample(d, replay);
    const GeoPoint c{s[0], s[1], s[2]};
    const double v = check(p, kNaN, c, Phase::takeoff, cs, 10.0).violation;
    if (v < best) {
      best = v;
      best_pt = c;
    }
  }
  EXPECT_EQ(r.point, best_pt);
  EXPECT_EQ(r.report.violation, best);
}

TEST(InferStep, Deterministic) {
  const GeoPoint p{28.0, -81.0, 1000.0};
  nn::GaussianParams3 d;
  d.mu = {p.lat + 0.001, p.lon + 0.001, p.alt + 50.0};
  d.sigma = {1e-3, 1e-3, 40.0};
  d.rho = {0.2, 0.0, -0.1};
  nn::Rng a(3), b(3);
  for (int k = 0; k < 20; ++k) {
    auto ra = infer_step(d, p, 45.0, Phase::approach, {}, 10.0, a);
    auto rb = infer_step(d, p, 45.0, Phase::approach, {}, 10.0, b);
    EXPECT_EQ(ra.point, rb.point);
    EXPECT_LE(ra.samples_drawn, kDefaultMaxResample);
    if (ra.passed) EXPECT_TRUE(check(p, 45.0, ra.point, Phase::approach, {}, 10.0).pass);
  }
}

TEST(ConstraintFile, RoundTripExact) {
  ConstraintSet cs;
  cs.theta_c = 12.345678901234567;
  cs.theta_d = 3.1;
  cs.omega_rot = 2.9999999999;
  cs.max_resample = 42;
  cs.fitted_from = "synthetic-departures";
  std::stringstream ss;
  write_constraint_set(ss, cs);
  auto back = read_constraint_set(ss);
  EXPECT_EQ(back.theta_c, cs.theta_c);
  EXPECT_EQ(back.theta_d, cs.theta_d);
  EXPECT_EQ(back.omega_rot, cs.omega_rot);
  EXPECT_EQ(back.max_resample, 42);
  EXPECT_EQ(back.fitted_from, cs.fitted_from);
}

TEST(ConstraintFile, RejectsBadInput) {
  std::stringstream bad("format = something-else\nversion = 1\n");
  EXPECT_THROW(read_constraint_set(bad), DataError);
  ConstraintSet cs;
  cs.theta_c = 95.0;
  EXPECT_THROW(cs.validate(), InvalidArgument);
}
