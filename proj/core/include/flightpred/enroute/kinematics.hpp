#pragma once

#include <array>
#include <vector>

#include "flightpred/constraints/geo.hpp"
#include "flightpred/nn/tensor.hpp"

namespace flightpred::enroute {

struct KinematicTriple {
  std::array<double, 3> v{};  // east, north, up (m/s)
  double theta_deg = 0.0;     // track angle, [0, 360)
  GeoPoint pos;               // position at the end of the step
};

/// One triple per consecutive pair: V from the haversine distance split by
/// bearing plus dalt / dt, theta = initial bearing. A repeated point gives
/// V = 0 and carries theta forward (`initial_theta_deg` before the first move).
std::vector<KinematicTriple> derive_kinematics(const std::vector<GeoPoint>& track, double dt_s = 10.0,
                                               double initial_theta_deg = 0.0);

/// Per-term multipliers; 1, 1, 1 is the unweighted sum.
struct LvaWeights {
  double velocity = 1.0;
  double angle = 1.0;
  double position = 1.0;
};

/// (1/n) sum |V - V^|^2 + wrap(theta - theta^)^2 + d3(T, T^)^2 in m^2/s^2, deg^2 and m^2.
double lva_loss(const std::vector<KinematicTriple>& pred, const std::vector<KinematicTriple>& truth,
                const LvaWeights& w = {});

/// The differentiable forms below take positions as [dlat, dlon, dalt] offsets
/// from a fixed `origin`, so differences of nearby points keep full precision.
GeoPoint offset_to_point(const GeoPoint& origin, const nn::Tensor& offset);
nn::Tensor point_to_offset(const GeoPoint& origin, const GeoPoint& p);

/// Kinematics of the step from offset `prev` to offset `cur`:
/// [v_east, v_north, v_up, theta_deg] with theta in (-180, 180].
nn::Tensor step_kinematics(const GeoPoint& origin, const nn::Tensor& prev, const nn::Tensor& cur, double dt_s);
/// Squared 3-D distance between offset `p` and a fixed point; smooth at zero.
nn::Tensor squared_distance_3d(const GeoPoint& origin, const nn::Tensor& p, const GeoPoint& q);
/// LVA over a predicted path: step i runs from prev[i] to pred[i] and is scored
/// against truth[i].
nn::Tensor lva_loss(const GeoPoint& origin, const std::vector<nn::Tensor>& prev, const std::vector<nn::Tensor>& pred,
                    const std::vector<KinematicTriple>& truth, double dt_s, const LvaWeights& w = {});

}  // namespace flightpred::enroute
