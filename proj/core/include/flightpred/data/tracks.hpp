#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/constraints/geo.hpp"
#include "flightpred/phase/fuzzy.hpp"

namespace flightpred::data {

inline constexpr double kStepSeconds = 10.0;
inline constexpr double kMaxGapSeconds = 120.0;

/// One surveillance report. Altitude in ft and speed in kt as on disk.
struct TrackPoint {
  double timestamp = 0.0;  // s since epoch
  std::string flight_id;
  double lat = 0.0;
  double lon = 0.0;
  double alt_ft = 0.0;
  double gs_kt = 0.0;
  double vrate_fpm = 0.0;
  double heading_deg = std::numeric_limits<double>::quiet_NaN();
  std::string actype;
  double bank_deg = std::numeric_limits<double>::quiet_NaN();

  GeoPoint geo() const;
  friend bool operator==(const TrackPoint&, const TrackPoint&);
};

struct Flight {
  std::string id;
  std::string actype;
  std::vector<TrackPoint> points;
  /// Optional per-point annotations; empty or one entry per point.
  std::vector<phase::Phase> phases;
  std::vector<double> activation;

  std::vector<GeoPoint> geo_points() const;
  std::vector<double> times() const;
};

struct ParseReport {
  std::size_t rows = 0;
  std::size_t malformed = 0;
  std::vector<std::string> messages;  // first few problems, with line numbers
};

struct ParseResult {
  std::vector<Flight> flights;  // ordered by first appearance, points time-sorted
  ParseReport report;
};

/// Header must contain timestamp, flight_id, lat, lon, alt_ft, gs_kt and vrate_fpm.
/// heading_deg, actype, bank_deg, phase and activation are optional.
ParseResult parse_tracks(std::istream& is);
ParseResult parse_tracks_file(const std::string& path);

/// Writes the base columns plus bank_deg/phase/activation when any flight carries them.
void write_tracks(std::ostream& os, const std::vector<Flight>& flights);
void write_tracks_file(const std::string& path, const std::vector<Flight>& flights);

struct Blocklist {
  std::set<std::string> types;
  std::set<std::string> ids;
};

std::vector<Flight> filter_trainers(const std::vector<Flight>& flights, const Blocklist& blocklist);

/// Splits wherever consecutive reports are more than `max_gap_s` apart.
std::vector<Flight> split_on_gaps(const Flight& flight, double max_gap_s = kMaxGapSeconds);

/// Linear interpolation onto t = anchor + 10 k, anchor = first timestamp rounded up to a
/// multiple of 10 s. Speed, vertical rate and heading are recomputed from the grid.
/// Gaps over 120 s split the flight first; pieces with fewer than 2 grid points are dropped.
/// Throws InvalidArgument for fewer than 2 input points.
std::vector<Flight> resample_10s(const Flight& flight);

/// Calendar day (UTC) of a timestamp.
std::int64_t day_of(double timestamp);

struct DaySplit {
  std::vector<Flight> train, val, test;
  std::vector<std::int64_t> train_days, val_days, test_days;
};

/// Shuffles distinct days (keyed by each flight's first timestamp) and assigns
/// round(n r_train), round(n r_val) and the remainder.
DaySplit split_by_days(const std::vector<Flight>& flights, double r_train = 0.6, double r_val = 0.2,
                       double r_test = 0.2, std::uint64_t seed = 0);

/// Day counts used by split_by_days for `n_days`.
std::array<std::size_t, 3> split_counts(std::size_t n_days, double r_train, double r_val, double r_test);

/// Converts to a constraint-fitting track with the given phase (alt in m).
constraints::LabeledTrack to_labeled_track(const Flight& flight, phase::Phase phase);

/// Contiguous takeoff and approach runs of an annotated flight, at least
/// `min_points` long, each as a labelled track. Throws when unannotated.
std::vector<constraints::LabeledTrack> phase_runs(const Flight& flight, std::size_t min_points = 3);

/// Labels every point with the fuzzy classifier and replaces the annotations
/// with the segmented labels; activation holds each point's rule degree.
void annotate_phases(Flight& flight, const phase::FuzzyParams& params = {});

/// Reports on the 10 s grid from `t0`, speed, vertical rate and heading derived
/// from consecutive points (altitude in m on input).
Flight flight_from_points(const std::string& id, const std::vector<GeoPoint>& points, double t0,
                          const std::string& actype = {});

/// Majority phase over a flight's annotations. Throws when unannotated.
phase::Phase dominant_phase(const Flight& flight);

}  // namespace flightpred::data
