#pragma once

#include <map>
#include <string>
#include <vector>

#include "flightpred/data/tracks.hpp"
#include "flightpred/graph/stgraph.hpp"
#include "flightpred/phase/fuzzy.hpp"

namespace flightpred::terminal {

/// Aircraft type classes used for the node one-hot.
inline constexpr std::size_t kTypeClasses = 4;

/// Heavy / medium / light / unknown, from an ICAO type designator.
int type_code_of(const std::string& actype);

/// An st-graph plus the bookkeeping needed to map nodes back to flights.
struct Scene {
  graph::STGraph graph;
  std::vector<std::string> flight_ids;          // indexed by NodeId
  std::map<graph::NodeId, phase::Phase> phases;  // dominant phase per node
  double t0 = 0.0;                               // timestamp of frame 0
};

/// Builds frames from flights already on the 10 s grid. Frame k holds every
/// flight with a report at t0 + 10 k, where t0 is the earliest report.
/// Flights without phase annotations are treated as en-route.
Scene build_scene(const std::vector<data::Flight>& flights, double scene_radius_m = graph::kDefaultSceneRadiusM);

/// Groups flights whose time spans overlap (transitively), ordered by start time.
std::vector<std::vector<data::Flight>> group_concurrent(const std::vector<data::Flight>& flights);

/// First `frames` frames of a scene (graph rebuilt from the truncated frames).
Scene truncate_scene(const Scene& scene, std::size_t frames);

}  // namespace flightpred::terminal
