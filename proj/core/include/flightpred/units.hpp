#pragma once

namespace flightpred::units {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kFeetToMeters = 0.3048;
inline constexpr double kKnotsToMps = 1852.0 / 3600.0;
inline constexpr double kMpsToFpm = 1.0 / kFeetToMeters * 60.0;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }
constexpr double ft2m(double ft) { return ft * kFeetToMeters; }
constexpr double m2ft(double m) { return m / kFeetToMeters; }
constexpr double kt2mps(double kt) { return kt * kKnotsToMps; }
constexpr double mps2kt(double mps) { return mps / kKnotsToMps; }
constexpr double fpm2mps(double fpm) { return fpm / kMpsToFpm; }
constexpr double mps2fpm(double mps) { return mps * kMpsToFpm; }

}  // namespace flightpred::units
