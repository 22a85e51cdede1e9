#pragma once

#include <iosfwd>

namespace flightpred {

inline constexpr double kEarthRadiusM = 6371000.0;

/// Geodetic waypoint: latitude/longitude in degrees, altitude in meters.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  double alt = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

std::ostream& operator<<(std::ostream& os, const GeoPoint& p);

/// Throws InvalidArgument when lat/lon are out of range or alt is not finite.
void validate(const GeoPoint& p);

/// Great-circle distance in meters on a sphere of radius 6,371 km. Altitude is ignored.
double haversine(const GeoPoint& a, const GeoPoint& b);

/// Initial bearing from a to b, degrees clockwise from north in [0, 360).
/// Coincident points have bearing 0.
double initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// Point reached from `origin` after travelling `distance_m` along `bearing_deg`.
/// Altitude is copied from the origin.
GeoPoint destination(const GeoPoint& origin, double bearing_deg, double distance_m);

/// Horizontal great-circle distance and altitude delta combined Euclidean-style.
double distance_3d(const GeoPoint& a, const GeoPoint& b);

/// Wraps an angle difference in degrees to (-180, 180].
double wrap_angle_deg(double deg);

/// Normalizes an angle in degrees to [0, 360).
double normalize_heading_deg(double deg);

}  // namespace flightpred
