#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "flightpred/constraints/geo.hpp"
#include "flightpred/data/tracks.hpp"

namespace flightpred::data {

/// Terminal-area scenario: arrivals on one final-approach centerline and
/// departures climbing out on the runway heading.
struct ScenarioConfig {
  std::size_t n_arrivals = 2;
  std::size_t n_departures = 0;
  GeoPoint airport{28.4312, -81.3081, 0.0};  // runway threshold
  double runway_heading_deg = 180.0;           // direction of travel on the runway
  std::size_t steps = 48;                      // reports per flight, 10 s apart
  double start_time = 0.0;
  std::uint64_t seed = 0;
  std::string actype = "A320";

  // Position noise (1-sigma, meters) applied to reported positions.
  double noise_m = 15.0;
  double alt_noise_m = 15.0;
  double heading_noise_deg = 0.0;

  // Arrivals.
  double glide_min_deg = 3.0;
  double glide_max_deg = 3.0;
  double lead_speed_min_mps = 65.0;
  double lead_speed_max_mps = 75.0;
  double closing_speed_min_mps = 5.0;
  double closing_speed_max_mps = 25.0;
  double lead_start_min_m = 36000.0;  // along-track distance to threshold at t = 0
  double lead_start_max_m = 40000.0;
  bool yield = true;
  double yield_distance_m = 5000.0;
  double yield_onset_min_s = 100.0;
  double yield_onset_max_s = 500.0;
  double max_initial_gap_m = 17000.0;
  double decel_mps2 = 1.0;
  double separation_floor_m = 3000.0;

  // Departures.
  double climb_angle_deg = 12.0;      // true maximum
  double climb_angle_min_deg = 12.0;  // per-flight angle drawn from [min, max]
  double departure_speed_mps = 80.0;
  double toc_alt_m = 3000.0;
  double turn_rate_deg_s = 3.0;
  double turn_total_deg = 90.0;

  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
};

struct Scenario {
  std::vector<Flight> flights;          // arrivals first, then departures; truth phases attached
  std::vector<double> yield_onset_s;    // per arrival, seconds after start; NaN when it never yields
  std::vector<std::vector<GeoPoint>> truth;  // noiseless positions per flight
};

Scenario gen_synthetic_scenario(const ScenarioConfig& cfg);

/// `count` scenarios placed one hour apart; scenario k uses seed cfg.seed + k and
/// flight ids "S<k>-A<i>" / "S<k>-D<i>".
std::vector<Scenario> gen_synthetic_scenarios(const ScenarioConfig& cfg, std::size_t count);

/// Minimum pairwise 3-D distance between noiseless arrival positions at common steps.
double min_pairwise_separation(const Scenario& s);

/// Climb, cruise and descent with constant vertical rates and a linear speed schedule.
struct ProfileConfig {
  GeoPoint origin{28.4312, -81.3081, 0.0};
  double heading_deg = 45.0;
  double start_alt_ft = 1000.0;
  double cruise_alt_ft = 35000.0;
  double end_alt_ft = 2000.0;
  double climb_fpm = 2500.0;
  double descent_fpm = -2000.0;
  double low_speed_kt = 250.0;
  double cruise_speed_kt = 550.0;
  std::size_t cruise_steps = 60;
  double start_time = 0.0;
  std::string id = "PROFILE";
};

Flight make_climb_cruise_descend(const ProfileConfig& cfg);

}  // namespace flightpred::data
