#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "flightpred/constraints/geo.hpp"
#include "flightpred/nn/gaussian.hpp"
#include "flightpred/nn/parameters.hpp"
#include "flightpred/phase/fuzzy.hpp"

namespace flightpred::constraints {

/// 1500 ft.
inline constexpr double kClimbFitFloorM = 457.2;
inline constexpr int kDefaultMaxResample = 100;

struct ConstraintSet {
  double theta_c = 15.0;    // deg, max climb angle
  double theta_d = 15.0;    // deg, max descend angle
  double omega_rot = 3.0;   // deg/s, max rate of turn
  int max_resample = kDefaultMaxResample;
  std::string fitted_from = "default";

  /// Throws InvalidArgument when a field is outside its domain.
  void validate() const;
};

/// A track with one phase label. heading_deg/bank_deg/speed_kt may be empty
/// or hold NaN entries where the value is missing.
struct LabeledTrack {
  std::vector<double> time_s;
  std::vector<GeoPoint> points;
  std::vector<double> heading_deg;
  std::vector<double> bank_deg;
  std::vector<double> speed_kt;
  phase::Phase phase = phase::Phase::takeoff;
  std::string id;
};

struct AngleFit {
  double max_deg = 0.0;
  double p995_deg = 0.0;
  std::size_t flights_used = 0;
};

struct ClimbDescendFit {
  AngleFit climb;
  AngleFit descend;
  std::vector<std::string> warnings;
};

/// Climb angle of one takeoff track from the first point above 1500 ft to TOC
/// (first maximum-altitude point). Returns NaN and appends a warning when the
/// horizontal distance is zero or no point qualifies.
double climb_angle_deg(const LabeledTrack& track, std::vector<std::string>* warnings = nullptr);
/// Descend angle of one approach track from TOD (last maximum-altitude point)
/// to the last point above 1500 ft.
double descend_angle_deg(const LabeledTrack& track, std::vector<std::string>* warnings = nullptr);

/// Max (and 99.5th percentile) of the per-flight angles. Takeoff tracks feed
/// theta_c, approach tracks feed theta_d. Throws DataError when either side
/// has no qualifying flight.
ClimbDescendFit fit_climb_descend(const std::vector<LabeledTrack>& tracks);

/// Rate of turn from 1091 tan(bank) / v_kt, in deg/s.
double rate_of_turn_from_bank(double bank_deg, double speed_kt);

struct RotFit {
  double max_deg_s = 0.0;
  double p995_deg_s = 0.0;
  std::size_t samples = 0;
  bool from_bank = false;
};

/// Uses the bank path on points that carry bank and speed, the empirical
/// |dheading|/dt path elsewhere. Throws DataError("constraints unavailable")
/// when no point yields a turn-rate sample.
RotFit fit_rot(const std::vector<LabeledTrack>& tracks);

enum class FitStatistic { max, p995 };

ConstraintSet make_constraint_set(const ClimbDescendFit& angles, const RotFit& rot,
                                  FitStatistic statistic = FitStatistic::max, std::string tag = "fitted");

/// Linear-interpolated percentile, q in [0, 100]. Empty input gives NaN.
double percentile(std::vector<double> values, double q);

struct CheckReport {
  bool pass = true;
  bool vertical_jump = false;
  double angle_deg = 0.0;        // implied climb (+) or descend (-) angle
  double turn_rate_deg_s = 0.0;  // |dbearing| / dt
  double angle_excess = 0.0;     // deg above the applicable limit
  double turn_excess = 0.0;      // deg/s above omega_rot
  /// angle_excess / limit + turn_excess / omega_rot.
  double violation = 0.0;
  std::string reason;
};

/// Gate a candidate step. `prev_heading_deg` NaN disables the turn check.
/// Climbing steps are checked against theta_c and descending steps against
/// theta_d. En-route always passes.
CheckReport check(const GeoPoint& prev, double prev_heading_deg, const GeoPoint& cand, phase::Phase phase,
                  const ConstraintSet& cs, double dt_s);

struct InferResult {
  GeoPoint point;
  bool passed = true;   // false when the minimum-violation fallback was used
  int samples_drawn = 0;
  CheckReport report;
};

/// Rejection sampling over `dist` (absolute lat/lon/alt) up to max_resample
/// draws; returns the first passing candidate or the least-violating one.
InferResult infer_step(const nn::GaussianParams3& dist, const GeoPoint& prev, double prev_heading_deg,
                       phase::Phase phase, const ConstraintSet& cs, double dt_s, nn::Rng& rng);

/// Versioned key-value text format.
void write_constraint_set(std::ostream& os, const ConstraintSet& cs);
ConstraintSet read_constraint_set(std::istream& is);
void save_constraint_set(const std::string& path, const ConstraintSet& cs);
ConstraintSet load_constraint_set(const std::string& path);

}  // namespace flightpred::constraints
