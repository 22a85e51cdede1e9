#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flightpred/constraints/geo.hpp"

namespace flightpred::data {

inline constexpr std::size_t kPlanLength = 10;

struct FlightPlan {
  std::string plan_id;
  std::array<GeoPoint, kPlanLength> waypoints{};
  bool real = false;  // false for the zero-filled placeholder
};

using WaypointTable = std::map<std::string, GeoPoint>;
/// flight_id -> waypoint ids in route order.
using PlanBook = std::map<std::string, std::vector<std::string>>;

/// `id,lat,lon` CSV with header.
WaypointTable load_waypoint_table(const std::string& path);
WaypointTable parse_waypoint_table(const std::string& text);
/// JSON object mapping flight_id to a list of waypoint ids.
PlanBook load_plan_book(const std::string& path);
PlanBook parse_plan_book(const std::string& json_text);

/// Reduces a polyline to `count` points: endpoints kept, then the point with the
/// largest cross-track deviation from its current segment is inserted repeatedly.
std::vector<GeoPoint> simplify_max_deviation(const std::vector<GeoPoint>& points, std::size_t count);
/// `count` points equally spaced in great-circle arc length along the polyline.
std::vector<GeoPoint> resample_arc_length(const std::vector<GeoPoint>& points, std::size_t count);

/// Resolves ids and selects exactly 10 characteristic points. An absent or empty
/// plan gives 10 zero points. Unknown ids raise DataError listing all of them.
FlightPlan plan_to_waypoints(const std::optional<std::vector<std::string>>& ids, const WaypointTable& table,
                             const std::string& plan_id = {});

/// Same selection applied to already-resolved coordinates.
FlightPlan plan_from_points(const std::vector<GeoPoint>& points, const std::string& plan_id = {});

}  // namespace flightpred::data
