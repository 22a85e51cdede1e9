#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flightpred/constraints/geo.hpp"

namespace flightpred::graph {

using NodeId = std::uint32_t;

/// 10 NM.
inline constexpr double kDefaultSceneRadiusM = 18520.0;

struct NodeState {
  NodeId id = 0;
  GeoPoint pos;
  int type_code = 0;
  std::vector<double> weather;  // optional local weather vector
};

struct SceneFrame {
  long t = 0;  // 10 s step index
  std::vector<NodeState> aircraft;
};

struct EdgeFeature {
  double distance_m = 0.0;  // great-circle plus altitude delta, Euclidean combination
  double bearing_deg = 0.0; // from a to b, clockwise from north, [0, 360)
  double altitude_delta_m = 0.0;  // b.alt - a.alt
};

/// Coincident points give distance 0 and bearing 0.
EdgeFeature edge_feature(const GeoPoint& a, const GeoPoint& b);

enum class Factor { spatial, temporal };

/// Unordered pair stored with u < v; `feature` is oriented from u to v.
struct SpatialEdge {
  NodeId u = 0;
  NodeId v = 0;
  EdgeFeature feature;
};

/// Links `id` at frame index k-1 to the same id at frame index k.
struct TemporalEdge {
  NodeId id = 0;
};

struct STGraph {
  std::vector<SceneFrame> frames;                       // aircraft sorted by id
  std::vector<std::vector<SpatialEdge>> spatial_edges;  // per frame index
  std::vector<std::vector<TemporalEdge>> temporal_edges;  // per frame index, edges arriving at that frame
  double scene_radius_m = kDefaultSceneRadiusM;

  static constexpr Factor factor_of(const SpatialEdge&) { return Factor::spatial; }
  static constexpr Factor factor_of(const TemporalEdge&) { return Factor::temporal; }

  std::size_t frame_count() const { return frames.size(); }
  std::size_t spatial_edge_count() const;
  std::size_t temporal_edge_count() const;
  /// Nullptr when the id is absent from the frame.
  const NodeState* find(std::size_t frame, NodeId id) const;
};

/// Pairs of a frame whose horizontal separation is within the radius.
std::vector<SpatialEdge> spatial_edges_for(const SceneFrame& frame, double scene_radius_m);

/// Throws InvalidArgument for non-consecutive frame indices, duplicate ids or
/// invalid positions. Aircraft order within a frame does not matter.
STGraph build_st_graph(std::vector<SceneFrame> frames, double scene_radius_m = kDefaultSceneRadiusM);

/// Spatial edges incident to `id` in frame index `frame`. Throws when absent.
int node_degree(const STGraph& g, NodeId id, std::size_t frame);
/// Neighbour ids of `id` in frame index `frame`, ascending.
std::vector<NodeId> neighbors(const STGraph& g, NodeId id, std::size_t frame);

/// Line-oriented text dump: one "frame", "node", "spatial", "temporal" record per line.
void dump(std::ostream& os, const STGraph& g);

}  // namespace flightpred::graph
