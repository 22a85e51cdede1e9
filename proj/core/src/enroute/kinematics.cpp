#include "flightpred/enroute/kinematics.hpp"

#include <cmath>

#include "flightpred/error.hpp"
#include "flightpred/nn/ops.hpp"
#include "flightpred/units.hpp"

namespace flightpred::enroute {

using nn::Tensor;
using units::deg2rad;

std::vector<KinematicTriple> derive_kinematics(const std::vector<GeoPoint>& track, double dt_s,
                                               double initial_theta_deg) {
  if (track.size() < 2) throw InvalidArgument("derive_kinematics: need at least 2 points");
  if (!(dt_s > 0.0)) throw InvalidArgument("derive_kinematics: dt must be positive");
  std::vector<KinematicTriple> out;
  out.reserve(track.size() - 1);
  double theta = normalize_heading_deg(initial_theta_deg);
  for (std::size_t i = 1; i < track.size(); ++i) {
    const GeoPoint& a = track[i - 1];
    const GeoPoint& b = track[i];
    KinematicTriple k;
    k.pos = b;
    if (a == b) {
      k.theta_deg = theta;
    } else {
      const double d = haversine(a, b);
      if (d > 0.0) theta = initial_bearing(a, b);
      const double th = deg2rad(theta);
      k.v = {d * std::sin(th) / dt_s, d * std::cos(th) / dt_s, (b.alt - a.alt) / dt_s};
      k.theta_deg = theta;
    }
    out.push_back(k);
  }
  return out;
}

double lva_loss(const std::vector<KinematicTriple>& pred, const std::vector<KinematicTriple>& truth,
                const LvaWeights& w) {
  if (pred.size() != truth.size()) throw InvalidArgument("lva_loss: length mismatch");
  if (pred.empty()) throw InvalidArgument("lva_loss: empty sequence");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double dv = 0.0;
    for (int c = 0; c < 3; ++c) dv += (truth[i].v[c] - pred[i].v[c]) * (truth[i].v[c] - pred[i].v[c]);
    const double da = wrap_angle_deg(truth[i].theta_deg - pred[i].theta_deg);
    const double dp = distance_3d(truth[i].pos, pred[i].pos);
    total += w.velocity * dv + w.angle * da * da + w.position * dp * dp;
  }
  return total / static_cast<double>(pred.size());
}

namespace {

Tensor component(const Tensor& p, std::size_t i) { return nn::slice(p, i, 1); }

Tensor radians(const Tensor& deg) { return nn::scale(deg, units::kPi / 180.0); }

// Haversine "a" term. Latitudes are absolute; the differences come in separately.
Tensor haversine_a(const Tensor& phi1, const Tensor& phi2, const Tensor& dphi, const Tensor& dlam) {
  const Tensor s_phi = nn::sin(nn::scale(dphi, 0.5));
  const Tensor s_lam = nn::sin(nn::scale(dlam, 0.5));
  return nn::add(nn::square(s_phi), nn::mul(nn::mul(nn::cos(phi1), nn::cos(phi2)), nn::square(s_lam)));
}

Tensor abs_lat(const GeoPoint& origin, const Tensor& off) { return radians(nn::add_scalar(component(off, 0), origin.lat)); }

}  // namespace

GeoPoint offset_to_point(const GeoPoint& origin, const Tensor& offset) {
  GeoPoint g{origin.lat + offset[0], wrap_angle_deg(origin.lon + offset[1]), origin.alt + offset[2]};
  if (g.lon == 180.0) g.lon = -180.0;
  return g;
}

Tensor point_to_offset(const GeoPoint& origin, const GeoPoint& p) {
  return Tensor::vector({p.lat - origin.lat, wrap_angle_deg(p.lon - origin.lon), p.alt - origin.alt});
}

Tensor step_kinematics(const GeoPoint& origin, const Tensor& prev, const Tensor& cur, double dt_s) {
  const Tensor phi1 = abs_lat(origin, prev), phi2 = abs_lat(origin, cur);
  const Tensor d = nn::sub(cur, prev);
  const Tensor dlam = radians(component(d, 1));
  const Tensor dphi = radians(component(d, 0));
  const Tensor a = haversine_a(phi1, phi2, dphi, dlam);
  // Central angle c over sin c, smooth through c = 0.
  const Tensor ratio = nn::div(nn::asin_sqrt_ratio(a), nn::sqrt(nn::add_scalar(nn::scale(a, -1.0), 1.0)));
  const Tensor y = nn::mul(nn::sin(dlam), nn::cos(phi2));
  // Same x as the bearing formula, written without the cancellation of two O(1) terms.
  const Tensor s_lam = nn::sin(nn::scale(dlam, 0.5));
  const Tensor x = nn::add(nn::sin(dphi), nn::scale(nn::mul(nn::mul(nn::sin(phi1), nn::cos(phi2)), nn::square(s_lam)), 2.0));
  const double k = kEarthRadiusM / dt_s;
  const Tensor ve = nn::scale(nn::mul(y, ratio), k);
  const Tensor vn = nn::scale(nn::mul(x, ratio), k);
  const Tensor vu = nn::scale(component(d, 2), 1.0 / dt_s);
  const Tensor theta = nn::scale(nn::atan2(y, x), 180.0 / units::kPi);
  return nn::concat({ve, vn, vu, theta});
}

Tensor squared_distance_3d(const GeoPoint& origin, const Tensor& p, const GeoPoint& q) {
  const Tensor d = nn::sub(point_to_offset(origin, q), p);
  const Tensor phi1 = abs_lat(origin, p);
  const Tensor phi2 = Tensor::scalar(deg2rad(q.lat));
  const Tensor dlam = radians(nn::wrap_degrees(component(d, 1)));
  const Tensor a = nn::clamp(haversine_a(phi1, phi2, radians(component(d, 0)), dlam), 0.0, 1.0);
  const Tensor horiz = nn::scale(nn::asin_sqrt_squared(a), 4.0 * kEarthRadiusM * kEarthRadiusM);
  return nn::add(horiz, nn::square(component(d, 2)));
}

Tensor lva_loss(const GeoPoint& origin, const std::vector<Tensor>& prev, const std::vector<Tensor>& pred,
                const std::vector<KinematicTriple>& truth, double dt_s, const LvaWeights& w) {
  if (prev.size() != pred.size() || pred.size() != truth.size()) throw InvalidArgument("lva_loss: length mismatch");
  if (pred.empty()) throw InvalidArgument("lva_loss: empty sequence");
  std::vector<Tensor> terms;
  terms.reserve(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Tensor kin = step_kinematics(origin, prev[i], pred[i], dt_s);
    const auto& t = truth[i];
    const Tensor target = Tensor::vector({t.v[0], t.v[1], t.v[2]});
    const Tensor dv = nn::sum(nn::square(nn::sub(target, nn::slice(kin, 0, 3))));
    const Tensor da = nn::wrap_degrees(nn::add_scalar(nn::scale(component(kin, 3), -1.0), t.theta_deg));
    const Tensor dp = squared_distance_3d(origin, pred[i], t.pos);
    terms.push_back(nn::add(nn::add(nn::scale(dv, w.velocity), nn::scale(nn::square(da), w.angle)),
                            nn::scale(dp, w.position)));
  }
  return nn::scale(nn::sum(nn::concat(terms)), 1.0 / static_cast<double>(pred.size()));
}

}  // namespace flightpred::enroute
