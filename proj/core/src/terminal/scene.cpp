#include "flightpred/terminal/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "flightpred/error.hpp"

namespace flightpred::terminal {

int type_code_of(const std::string& actype) {
  static const std::set<std::string> heavy{"A330", "A340", "A350", "A380", "B744", "B748", "B763", "B772",
                                           "B77W", "B788", "B789", "MD11"};
  static const std::set<std::string> medium{"A318", "A319", "A320", "A321", "B712", "B737", "B738", "B739",
                                            "B38M", "CRJ7", "CRJ9", "E170", "E175", "E190", "MD88"};
  static const std::set<std::string> light{"C172", "C152", "PA28", "SR22", "BE36", "C182", "DA40", "C208"};
  std::string up = actype;
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (heavy.count(up)) return 0;
  if (medium.count(up)) return 1;
  if (light.count(up)) return 2;
  return 3;
}

Scene build_scene(const std::vector<data::Flight>& flights, double scene_radius_m) {
  if (flights.empty()) throw InvalidArgument("build_scene: no flights");
  double t0 = std::numeric_limits<double>::infinity();
  double t1 = -std::numeric_limits<double>::infinity();
  for (const auto& f : flights) {
    if (f.points.empty()) throw InvalidArgument("build_scene: flight '" + f.id + "' has no points");
    t0 = std::min(t0, f.points.front().timestamp);
    t1 = std::max(t1, f.points.back().timestamp);
  }
  const auto n_frames = static_cast<std::size_t>(std::llround((t1 - t0) / data::kStepSeconds)) + 1;
  std::vector<graph::SceneFrame> frames(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) frames[k].t = static_cast<long>(k);

  Scene scene;
  scene.t0 = t0;
  for (std::size_t i = 0; i < flights.size(); ++i) {
    const auto& f = flights[i];
    const auto id = static_cast<graph::NodeId>(i);
    scene.flight_ids.push_back(f.id);
    scene.phases[id] = f.phases.empty() ? phase::Phase::enroute : data::dominant_phase(f);
    const int type = type_code_of(f.actype.empty() ? f.points.front().actype : f.actype);
    for (const auto& p : f.points) {
      const double k = (p.timestamp - t0) / data::kStepSeconds;
      const auto kr = std::llround(k);
      if (std::abs(k - static_cast<double>(kr)) > 1e-6) {
        throw DataError("build_scene: flight '" + f.id + "' is not on the 10 s grid");
      }
      frames[static_cast<std::size_t>(kr)].aircraft.push_back(graph::NodeState{id, p.geo(), type, {}});
    }
  }
  scene.graph = graph::build_st_graph(std::move(frames), scene_radius_m);
  return scene;
}

std::vector<std::vector<data::Flight>> group_concurrent(const std::vector<data::Flight>& flights) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < flights.size(); ++i)
    if (!flights[i].points.empty()) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return flights[a].points.front().timestamp < flights[b].points.front().timestamp;
  });
  std::vector<std::vector<data::Flight>> groups;
  double group_end = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    const auto& f = flights[i];
    if (groups.empty() || f.points.front().timestamp > group_end) {
      groups.emplace_back();
      group_end = -std::numeric_limits<double>::infinity();
    }
    groups.back().push_back(f);
    group_end = std::max(group_end, f.points.back().timestamp);
  }
  return groups;
}

Scene truncate_scene(const Scene& scene, std::size_t frames) {
  if (frames == 0 || frames > scene.graph.frame_count()) throw InvalidArgument("truncate_scene: bad frame count");
  Scene out;
  out.flight_ids = scene.flight_ids;
  out.phases = scene.phases;
  out.t0 = scene.t0;
  std::vector<graph::SceneFrame> f(scene.graph.frames.begin(),
                                   scene.graph.frames.begin() + static_cast<std::ptrdiff_t>(frames));
  out.graph = graph::build_st_graph(std::move(f), scene.graph.scene_radius_m);
  return out;
}

}  // namespace flightpred::terminal
