#pragma once

#include <cstddef>
#include <vector>

#include "flightpred/constraints/geo.hpp"

namespace flightpred::eval {

enum class KalmanMode { linear_accel, constant_speed };

struct KalmanConfig {
  double dt_s = 10.0;
  double measurement_sigma_m = 50.0;
  /// White-acceleration density for constant_speed, white-jerk density for linear_accel.
  double process_noise_cv = 0.05;   // m^2/s^3
  double process_noise_ca = 1e-4;   // m^2/s^5
};

/// Per-axis linear Kalman filter in a local east/north/up frame centred on
/// the last observation, run over `obs` and then extrapolated open-loop.
/// The state is initialised exactly from the first 2 (3) observations.
/// Throws InvalidArgument for fewer than 3 observations or horizon 0.
std::vector<GeoPoint> kalman_baseline(const std::vector<GeoPoint>& obs, std::size_t horizon, KalmanMode mode,
                                      const KalmanConfig& cfg = {});

/// Repeats the last observed step.
std::vector<GeoPoint> last_velocity_baseline(const std::vector<GeoPoint>& obs, std::size_t horizon);

}  // namespace flightpred::eval
