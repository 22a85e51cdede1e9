#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flightpred::phase {

enum class Phase { takeoff = 0, enroute = 1, approach = 2 };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

double gaussian_mf(double x, double mu, double sigma);
/// Piecewise-quadratic S spline: 0 below a, 1 above b, 0.5 at the midpoint.
double s_mf(double x, double a, double b);
/// 1 - s_mf(x, a, b).
double z_mf(double x, double a, double b);

struct MembershipFunction {
  enum class Kind { gaussian, s_shaped, z_shaped };
  Kind kind = Kind::gaussian;
  double p1 = 0.0;  // mu or a
  double p2 = 1.0;  // sigma or b

  static MembershipFunction gaussian(double mu, double sigma) { return {Kind::gaussian, mu, sigma}; }
  static MembershipFunction s_shaped(double a, double b) { return {Kind::s_shaped, a, b}; }
  static MembershipFunction z_shaped(double a, double b) { return {Kind::z_shaped, a, b}; }

  double operator()(double x) const;
  /// Throws InvalidArgument for sigma <= 0 or a >= b.
  void validate() const;
};

/// Membership functions for a commercial flight. Altitude in ft, speed in kt,
/// vertical rate in ft/min.
struct FuzzyParams {
  MembershipFunction h_lo = MembershipFunction::gaussian(10000.0, 10000.0);
  MembershipFunction h_hi = MembershipFunction::gaussian(35000.0, 20000.0);
  MembershipFunction v_mid = MembershipFunction::gaussian(300.0, 100.0);
  MembershipFunction v_hi = MembershipFunction::gaussian(600.0, 100.0);
  MembershipFunction roc_zero = MembershipFunction::gaussian(0.0, 100.0);
  MembershipFunction roc_plus = MembershipFunction::s_shaped(10.0, 1000.0);
  MembershipFunction roc_minus = MembershipFunction::z_shaped(-1000.0, -10.0);

  void validate() const;
};

struct PhaseLabel {
  Phase phase = Phase::enroute;
  double activation = 0.0;
  std::array<double, 3> degrees{};  // indexed by Phase
};

/// Rule degrees with AND = min and OR = max; argmax with ties resolved
/// Takeoff > EnRoute > Approach.
PhaseLabel classify_point(double alt_ft, double speed_kt, double roc_fpm, const FuzzyParams& params = {});

/// Warnings for inputs that look like they are in the wrong units.
std::vector<std::string> input_range_warnings(double alt_ft, double speed_kt, double roc_fpm);

struct Segment {
  Phase phase;
  std::size_t start;  // first point index
  std::size_t end;    // one past the last point index

  friend bool operator==(const Segment&, const Segment&) = default;
};

inline constexpr std::size_t kDefaultMinRun = 6;

/// Run-length merge of per-point labels; runs shorter than `min_run` are
/// absorbed into their longer neighbour (earlier neighbour on ties) until none remain.
std::vector<Segment> segment_labels(std::span<const Phase> labels, std::size_t min_run = kDefaultMinRun);

struct PointKinematics {
  double alt_ft;
  double speed_kt;
  double roc_fpm;
};

/// Classifies every point, then segments. Throws InvalidArgument on empty input.
std::vector<Segment> segment_flight(std::span<const PointKinematics> points, const FuzzyParams& params = {},
                                    std::size_t min_run = kDefaultMinRun);

/// Expands segments back to one label per point.
std::vector<Phase> expand_segments(std::span<const Segment> segments);

}  // namespace flightpred::phase
