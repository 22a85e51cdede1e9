#include "flightpred/constraints/geo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "flightpred/error.hpp"
#include "flightpred/units.hpp"

namespace flightpred {

using units::deg2rad;
using units::rad2deg;

std::ostream& operator<<(std::ostream& os, const GeoPoint& p) {
  return os << "(" << p.lat << ", " << p.lon << ", " << p.alt << " m)";
}

void validate(const GeoPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) throw InvalidArgument("latitude out of range");
  if (!(p.lon >= -180.0 && p.lon < 180.0)) throw InvalidArgument("longitude out of range");
  if (!std::isfinite(p.alt)) throw InvalidArgument("altitude not finite");
}

double haversine(const GeoPoint& a, const GeoPoint& b) {
  const double phi_a = deg2rad(a.lat);
  const double phi_b = deg2rad(b.lat);
  const double dphi = phi_b - phi_a;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::clamp(s1 * s1 + std::cos(phi_a) * std::cos(phi_b) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double initial_bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a.lat == b.lat && a.lon == b.lon) return 0.0;
  const double phi_a = deg2rad(a.lat);
  const double phi_b = deg2rad(b.lat);
  const double dlambda = deg2rad(b.lon - a.lon);
  const double y = std::sin(dlambda) * std::cos(phi_b);
  // cos(pa) sin(pb) - sin(pa) cos(pb) cos(dl), rearranged so short legs do not cancel
  const double s2 = std::sin(dlambda / 2.0);
  const double x = std::sin(phi_b - phi_a) + 2.0 * std::sin(phi_a) * std::cos(phi_b) * s2 * s2;
  return normalize_heading_deg(rad2deg(std::atan2(y, x)));
}

GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m) {
  const double delta = distance_m / kEarthRadiusM;
  const double theta = deg2rad(bearing_deg);
  const double phi1 = deg2rad(origin.lat);
  const double lambda1 = deg2rad(origin.lon);
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lambda2 = lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                              std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = rad2deg(lambda2);
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return {rad2deg(phi2), lon, origin.alt};
}

double distance_3d(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(haversine(a, b), b.alt - a.alt);
}

double wrap_angle_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w > 180.0) w -= 360.0;
  if (w <= -180.0) w += 360.0;
  return w;
}

double normalize_heading_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

}  // namespace flightpred
