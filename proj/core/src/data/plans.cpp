#include "flightpred/data/plans.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "flightpred/error.hpp"
#include "flightpred/textio.hpp"
#include "flightpred/units.hpp"

namespace flightpred::data {

using units::deg2rad;
using units::rad2deg;

WaypointTable parse_waypoint_table(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw DataError("waypoint table is empty");
  const auto header = textio::split(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "lat" || header[2] != "lon") {
    throw DataError("waypoint table header must be id,lat,lon");
  }
  WaypointTable table;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (textio::trim(line).empty()) continue;
    const auto f = textio::split(line);
    const auto lat = f.size() >= 3 ? textio::parse_double(f[1]) : std::nullopt;
    const auto lon = f.size() >= 3 ? textio::parse_double(f[2]) : std::nullopt;
    if (!lat || !lon || f[0].empty()) throw DataError("waypoint table line " + std::to_string(line_no) + " malformed");
    GeoPoint p{*lat, *lon, 0.0};
    try {
      validate(p);
    } catch (const InvalidArgument& e) {
      throw DataError("waypoint table line " + std::to_string(line_no) + ": " + e.what());
    }
    table[std::string(f[0])] = p;
  }
  return table;
}

WaypointTable load_waypoint_table(const std::string& path) { return parse_waypoint_table(textio::read_file(path)); }

PlanBook parse_plan_book(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("plan file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("plan file must be a JSON object keyed by flight_id");
  PlanBook book;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_array()) throw DataError("plan for '" + key + "' must be a list of waypoint ids");
    std::vector<std::string> ids;
    for (const auto& v : value) {
      if (!v.is_string()) throw DataError("plan for '" + key + "' contains a non-string id");
      ids.push_back(v.get<std::string>());
    }
    book[key] = std::move(ids);
  }
  return book;
}

PlanBook load_plan_book(const std::string& path) { return parse_plan_book(textio::read_file(path)); }

namespace {

// Distance from p to the great-circle segment a-b; beyond the ends, distance to the nearer end.
double segment_deviation(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double d_ab = haversine(a, b);
  const double d_ap = haversine(a, p);
  if (d_ab == 0.0) return d_ap;
  const double delta13 = d_ap / kEarthRadiusM;
  const double theta13 = deg2rad(initial_bearing(a, p));
  const double theta12 = deg2rad(initial_bearing(a, b));
  const double xt = std::asin(std::clamp(std::sin(delta13) * std::sin(theta13 - theta12), -1.0, 1.0));
  const double at = std::acos(std::clamp(std::cos(delta13) / std::cos(xt), -1.0, 1.0)) * kEarthRadiusM;
  const bool behind = std::cos(theta13 - theta12) < 0.0;
  if (behind || at > d_ab) return std::min(d_ap, haversine(b, p));
  return std::abs(xt) * kEarthRadiusM;
}

// Great-circle interpolation between a and b at fraction f.
GeoPoint intermediate(const GeoPoint& a, const GeoPoint& b, double f) {
  if (f <= 0.0) return a;
  if (f >= 1.0) return b;
  const double d = haversine(a, b) / kEarthRadiusM;
  if (d == 0.0) return a;
  const double phi1 = deg2rad(a.lat), lam1 = deg2rad(a.lon);
  const double phi2 = deg2rad(b.lat), lam2 = deg2rad(b.lon);
  const double A = std::sin((1.0 - f) * d) / std::sin(d);
  const double B = std::sin(f * d) / std::sin(d);
  const double x = A * std::cos(phi1) * std::cos(lam1) + B * std::cos(phi2) * std::cos(lam2);
  const double y = A * std::cos(phi1) * std::sin(lam1) + B * std::cos(phi2) * std::sin(lam2);
  const double z = A * std::sin(phi1) + B * std::sin(phi2);
  GeoPoint p{rad2deg(std::atan2(z, std::hypot(x, y))), rad2deg(std::atan2(y, x)), a.alt + f * (b.alt - a.alt)};
  if (p.lon >= 180.0) p.lon -= 360.0;
  return p;
}

}  // namespace

std::vector<GeoPoint> simplify_max_deviation(const std::vector<GeoPoint>& points, std::size_t count) {
  if (points.size() <= count) return points;
  if (count < 2) throw InvalidArgument("simplify_max_deviation: count must be >= 2");
  std::vector<std::size_t> kept{0, points.size() - 1};
  while (kept.size() < count) {
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t s = 0; s + 1 < kept.size(); ++s) {
      for (std::size_t i = kept[s] + 1; i < kept[s + 1]; ++i) {
        const double dev = segment_deviation(points[i], points[kept[s]], points[kept[s + 1]]);
        if (dev > best) {
          best = dev;
          best_idx = i;
        }
      }
    }
    kept.insert(std::upper_bound(kept.begin(), kept.end(), best_idx), best_idx);
  }
  std::vector<GeoPoint> out;
  for (auto i : kept) out.push_back(points[i]);
  return out;
}

std::vector<GeoPoint> resample_arc_length(const std::vector<GeoPoint>& points, std::size_t count) {
  if (points.empty()) throw InvalidArgument("resample_arc_length: empty polyline");
  if (count == 0) return {};
  if (count == 1) return {points.front()};
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < points.size(); ++i) cum.push_back(cum.back() + haversine(points[i - 1], points[i]));
  const double total = cum.back();
  std::vector<GeoPoint> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (k == 0) {
      out.push_back(points.front());
      continue;
    }
    if (k + 1 == count) {
      out.push_back(points.back());
      continue;
    }
    const double s = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 2 < points.size() && cum[seg + 1] < s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double f = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.push_back(intermediate(points[seg], points[seg + 1], f));
  }
  return out;
}

FlightPlan plan_from_points(const std::vector<GeoPoint>& points, const std::string& plan_id) {
  FlightPlan plan;
  plan.plan_id = plan_id;
  if (points.empty()) return plan;
  plan.real = true;
  const auto selected =
      points.size() >= kPlanLength ? simplify_max_deviation(points, kPlanLength) : resample_arc_length(points, kPlanLength);
  std::copy(selected.begin(), selected.end(), plan.waypoints.begin());
  return plan;
}

FlightPlan plan_to_waypoints(const std::optional<std::vector<std::string>>& ids, const WaypointTable& table,
                             const std::string& plan_id) {
  if (!ids || ids->empty()) {
    FlightPlan plan;
    plan.plan_id = plan_id;
    return plan;
  }
  std::vector<GeoPoint> points;
  std::vector<std::string> unknown;
  for (const auto& id : *ids) {
    auto it = table.find(id);
    if (it == table.end()) {
      unknown.push_back(id);
    } else {
      points.push_back(it->second);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown waypoint id(s):";
    for (const auto& u : unknown) msg += " " + u;
    throw DataError(msg);
  }
  return plan_from_points(points, plan_id);
}

}  // namespace flightpred::data
