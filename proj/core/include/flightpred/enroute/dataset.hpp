#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/enroute/synthetic.hpp"

namespace flightpred::enroute {

/// Directory layout:
///   tracks.csv           track CSV, one flight per scenario
///   waypoints.csv        id,lat,lon of every plan point
///   plans.json           flight_id -> waypoint ids
///   weather/<id>.wxg1    weather plane covering the flight
/// Flights are placed one hour apart from `t0`.
void save_enroute_dataset(const std::string& dir, const std::vector<EnrouteScenario>& scenarios, double t0 = 0.0);

struct EnrouteDataset {
  std::vector<EnrouteSample> samples;
  std::vector<std::string> skipped;  // flights too short for t_obs + horizon
};

/// Resamples each flight to 10 s, takes the first t_obs points as observed and
/// the next `horizon` as target (horizon 0 leaves it empty, for inference), and
/// cuts one weather window per observed point.
/// Missing weather files and unknown waypoint ids are all reported in one DataError.
EnrouteDataset load_enroute_dataset(const std::string& dir, std::size_t t_obs, std::size_t horizon,
                                    std::size_t window);

}  // namespace flightpred::enroute
