#include "flightpred/graph/stgraph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "flightpred/error.hpp"

namespace flightpred::graph {

EdgeFeature edge_feature(const GeoPoint& a, const GeoPoint& b) {
  EdgeFeature f;
  f.distance_m = distance_3d(a, b);
  f.bearing_deg = initial_bearing(a, b);
  f.altitude_delta_m = b.alt - a.alt;
  return f;
}

std::size_t STGraph::spatial_edge_count() const {
  std::size_t n = 0;
  for (const auto& e : spatial_edges) n += e.size();
  return n;
}

std::size_t STGraph::temporal_edge_count() const {
  std::size_t n = 0;
  for (const auto& e : temporal_edges) n += e.size();
  return n;
}

const NodeState* STGraph::find(std::size_t frame, NodeId id) const {
  if (frame >= frames.size()) return nullptr;
  const auto& ac = frames[frame].aircraft;
  auto it = std::lower_bound(ac.begin(), ac.end(), id, [](const NodeState& s, NodeId v) { return s.id < v; });
  return (it != ac.end() && it->id == id) ? &*it : nullptr;
}

std::vector<SpatialEdge> spatial_edges_for(const SceneFrame& frame, double scene_radius_m) {
  std::vector<const NodeState*> sorted;
  sorted.reserve(frame.aircraft.size());
  for (const auto& s : frame.aircraft) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const NodeState* a, const NodeState* b) { return a->id < b->id; });

  std::vector<SpatialEdge> edges;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (haversine(sorted[i]->pos, sorted[j]->pos) > scene_radius_m) continue;
      edges.push_back({sorted[i]->id, sorted[j]->id, edge_feature(sorted[i]->pos, sorted[j]->pos)});
    }
  }
  return edges;
}

STGraph build_st_graph(std::vector<SceneFrame> frames, double scene_radius_m) {
  if (!(scene_radius_m >= 0.0)) throw InvalidArgument("build_st_graph: scene radius must be >= 0");
  STGraph g;
  g.scene_radius_m = scene_radius_m;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    auto& f = frames[k];
    if (f.t < 0) throw InvalidArgument("build_st_graph: negative frame index");
    if (k > 0 && f.t != frames[k - 1].t + 1) {
      throw InvalidArgument("build_st_graph: frames must be time-ordered with consecutive indices");
    }
    std::sort(f.aircraft.begin(), f.aircraft.end(), [](const NodeState& a, const NodeState& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < f.aircraft.size(); ++i) {
      validate(f.aircraft[i].pos);
      if (i > 0 && f.aircraft[i].id == f.aircraft[i - 1].id) {
        throw InvalidArgument("build_st_graph: duplicate id " + std::to_string(f.aircraft[i].id) + " in frame " +
                              std::to_string(f.t));
      }
    }
  }
  g.frames = std::move(frames);
  g.spatial_edges.reserve(g.frames.size());
  g.temporal_edges.resize(g.frames.size());
  for (std::size_t k = 0; k < g.frames.size(); ++k) {
    g.spatial_edges.push_back(spatial_edges_for(g.frames[k], scene_radius_m));
    if (k == 0) continue;
    for (const auto& s : g.frames[k].aircraft) {
      if (g.find(k - 1, s.id)) g.temporal_edges[k].push_back({s.id});
    }
  }
  return g;
}

int node_degree(const STGraph& g, NodeId id, std::size_t frame) {
  if (!g.find(frame, id)) {
    throw InvalidArgument("node_degree: id " + std::to_string(id) + " absent from frame " + std::to_string(frame));
  }
  int n = 0;
  for (const auto& e : g.spatial_edges[frame]) n += (e.u == id || e.v == id) ? 1 : 0;
  return n;
}

std::vector<NodeId> neighbors(const STGraph& g, NodeId id, std::size_t frame) {
  if (!g.find(frame, id)) {
    throw InvalidArgument("neighbors: id " + std::to_string(id) + " absent from frame " + std::to_string(frame));
  }
  std::vector<NodeId> out;
  for (const auto& e : g.spatial_edges[frame]) {
    if (e.u == id) out.push_back(e.v);
    if (e.v == id) out.push_back(e.u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void dump(std::ostream& os, const STGraph& g) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::fixed << std::setprecision(6);
  for (std::size_t k = 0; k < g.frames.size(); ++k) {
    const auto& f = g.frames[k];
    os << "frame " << f.t << " nodes " << f.aircraft.size() << '\n';
    for (const auto& s : f.aircraft) {
      os << "node " << f.t << ' ' << s.id << ' ' << s.pos.lat << ' ' << s.pos.lon << ' ' << s.pos.alt << ' '
         << s.type_code << '\n';
    }
    for (const auto& e : g.spatial_edges[k]) {
      os << "spatial " << f.t << ' ' << e.u << ' ' << e.v << ' ' << e.feature.distance_m << ' '
         << e.feature.bearing_deg << ' ' << e.feature.altitude_delta_m << '\n';
    }
    for (const auto& e : g.temporal_edges[k]) os << "temporal " << f.t - 1 << ' ' << f.t << ' ' << e.id << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace flightpred::graph
