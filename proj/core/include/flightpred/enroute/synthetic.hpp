#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "flightpred/data/plans.hpp"
#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/enroute/weather.hpp"

namespace flightpred::enroute {

/// Cruise flights over smooth weather fields. A convective cell (strong
/// upward motion, so negative VVEL) near the planned route pushes the flight
/// sideways along a raised-cosine detour; the offset is a fixed function of
/// the cell's position and strength.
struct EnrouteScenarioConfig {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::size_t t_obs = 18;
  std::size_t horizon = 30;
  double dt_s = 10.0;
  double level_ft = 35000.0;
  double cell_deg = 0.1;        // field resolution
  double field_margin_deg = 1.0;

  double lat_min = 28.0, lat_max = 32.0;
  double lon_min = -88.0, lon_max = -82.0;
  double heading_min_deg = 80.0, heading_max_deg = 100.0;
  double speed_min_mps = 220.0, speed_max_mps = 250.0;
  double noise_m = 10.0;
  double alt_noise_m = 5.0;

  double cell_probability = 0.8;
  double cell_radius_m = 15000.0;      // Gaussian sigma of the VVEL anomaly
  double cell_vvel_pa_s = -4.0;        // peak anomaly at unit strength
  double cell_strength_min = 0.5, cell_strength_max = 1.0;
  double cross_min_m = 3000.0, cross_max_m = 25000.0;     // |cross-track offset| of the cell
  double ahead_min_m = 40000.0, ahead_max_m = 70000.0;    // cell along-track distance past the last observation
  double avoid_radius_m = 20000.0;     // cells farther off-route cause no detour
  double detour_gain = 0.75;           // detour metres per metre inside avoid_radius, at unit strength
  double detour_half_length_m = 40000.0;

  void validate() const;
};

struct EnrouteScenario {
  std::string flight_id;
  WeatherGrid field;
  std::vector<GeoPoint> track;       // t_obs + horizon reported points
  std::vector<GeoPoint> truth;       // noiseless positions
  data::FlightPlan plan;
  double detour_m = 0.0;             // signed peak offset, positive to the right
};

std::vector<EnrouteScenario> gen_enroute_scenarios(const EnrouteScenarioConfig& cfg);

/// Cuts the observed window, one weather window per observed point, and the target.
EnrouteSample make_enroute_sample(const EnrouteScenario& sc, std::size_t t_obs, std::size_t window);

}  // namespace flightpred::enroute
