#include "flightpred/eval/kalman.hpp"

#include <array>
#include <cmath>

#include "flightpred/error.hpp"
#include "flightpred/units.hpp"

namespace flightpred::eval {

namespace {

using units::deg2rad;
using units::rad2deg;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;
template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Mat<N> mul(const Mat<N>& a, const Mat<N>& b) {
  Mat<N> c{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t j = 0; j < N; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

template <std::size_t N>
Mat<N> transpose(const Mat<N>& a) {
  Mat<N> t{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) t[i][j] = a[j][i];
  return t;
}

template <std::size_t N>
Vec<N> mul(const Mat<N>& a, const Vec<N>& x) {
  Vec<N> y{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) y[i] += a[i][j] * x[j];
  return y;
}

// Scalar-measurement filter on one axis; the measurement picks state[0].
template <std::size_t N>
struct AxisFilter {
  Mat<N> F{};
  Mat<N> Q{};
  double R = 0.0;
  Vec<N> x{};
  Mat<N> P{};

  void predict() {
    x = mul(F, x);
    P = mul(mul(F, P), transpose(F));
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) P[i][j] += Q[i][j];
  }

  void update(double z) {
    const double s = P[0][0] + R;
    const double innov = z - x[0];
    Vec<N> k{};
    for (std::size_t i = 0; i < N; ++i) k[i] = P[i][0] / s;
    for (std::size_t i = 0; i < N; ++i) x[i] += k[i] * innov;
    Mat<N> np = P;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) np[i][j] -= k[i] * P[0][j];
    P = np;
  }
};

struct LocalFrame {
  GeoPoint origin;
  double cos_lat = 1.0;
  std::array<double, 3> to_local(const GeoPoint& p) const {
    return {kEarthRadiusM * deg2rad(wrap_angle_deg(p.lon - origin.lon)) * cos_lat,
            kEarthRadiusM * deg2rad(p.lat - origin.lat), p.alt};
  }
  GeoPoint to_geo(const std::array<double, 3>& v) const {
    GeoPoint p{origin.lat + rad2deg(v[1] / kEarthRadiusM), origin.lon + rad2deg(v[0] / (kEarthRadiusM * cos_lat)),
               v[2]};
    p.lat = std::clamp(p.lat, -90.0, 90.0);
    p.lon = wrap_angle_deg(p.lon);
    if (p.lon == 180.0) p.lon = -180.0;
    return p;
  }
};

std::vector<double> run_cv(const std::vector<double>& z, std::size_t horizon, const KalmanConfig& cfg) {
  const double dt = cfg.dt_s, R = cfg.measurement_sigma_m * cfg.measurement_sigma_m, q = cfg.process_noise_cv;
  AxisFilter<2> f;
  f.F = {{{1.0, dt}, {0.0, 1.0}}};
  f.Q = {{{q * dt * dt * dt / 3.0, q * dt * dt / 2.0}, {q * dt * dt / 2.0, q * dt}}};
  f.R = R;
  // Two-point start: exact on noiseless straight lines.
  f.x = {z[1], (z[1] - z[0]) / dt};
  f.P = {{{R, R / dt}, {R / dt, 2.0 * R / (dt * dt)}}};
  for (std::size_t k = 2; k < z.size(); ++k) {
    f.predict();
    f.update(z[k]);
  }
  std::vector<double> out;
  for (std::size_t h = 0; h < horizon; ++h) {
    f.x = mul(f.F, f.x);
    out.push_back(f.x[0]);
  }
  return out;
}

std::vector<double> run_ca(const std::vector<double>& z, std::size_t horizon, const KalmanConfig& cfg) {
  const double dt = cfg.dt_s, R = cfg.measurement_sigma_m * cfg.measurement_sigma_m, q = cfg.process_noise_ca;
  AxisFilter<3> f;
  f.F = {{{1.0, dt, dt * dt / 2.0}, {0.0, 1.0, dt}, {0.0, 0.0, 1.0}}};
  const double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt, d5 = d4 * dt;
  f.Q = {{{q * d5 / 20.0, q * d4 / 8.0, q * d3 / 6.0}, {q * d4 / 8.0, q * d3 / 3.0, q * d2 / 2.0},
          {q * d3 / 6.0, q * d2 / 2.0, q * dt}}};
  f.R = R;
  // Three-point start; J maps (z0, z1, z2) to (p, v, a) at the third sample.
  const Mat<3> J{{{0.0, 0.0, 1.0}, {1.0 / (2.0 * dt), -4.0 / (2.0 * dt), 3.0 / (2.0 * dt)},
                  {1.0 / d2, -2.0 / d2, 1.0 / d2}}};
  f.x = mul(J, Vec<3>{z[0], z[1], z[2]});
  f.P = mul(J, transpose(J));
  for (auto& row : f.P)
    for (double& v : row) v *= R;
  for (std::size_t k = 3; k < z.size(); ++k) {
    f.predict();
    f.update(z[k]);
  }
  std::vector<double> out;
  for (std::size_t h = 0; h < horizon; ++h) {
    f.x = mul(f.F, f.x);
    out.push_back(f.x[0]);
  }
  return out;
}

}  // namespace

std::vector<GeoPoint> kalman_baseline(const std::vector<GeoPoint>& obs, std::size_t horizon, KalmanMode mode,
                                      const KalmanConfig& cfg) {
  if (obs.size() < 3) throw InvalidArgument("kalman_baseline: need at least 3 observations");
  if (horizon == 0) throw InvalidArgument("kalman_baseline: horizon must be >= 1");
  if (!(cfg.dt_s > 0.0) || !(cfg.measurement_sigma_m > 0.0)) throw InvalidArgument("kalman_baseline: bad config");
  LocalFrame frame{obs.back(), std::cos(deg2rad(obs.back().lat))};
  std::array<std::vector<double>, 3> axes;
  for (const auto& p : obs) {
    const auto v = frame.to_local(p);
    for (int a = 0; a < 3; ++a) axes[a].push_back(v[a]);
  }
  std::array<std::vector<double>, 3> pred;
  for (int a = 0; a < 3; ++a) {
    pred[a] = mode == KalmanMode::linear_accel ? run_ca(axes[a], horizon, cfg) : run_cv(axes[a], horizon, cfg);
  }
  std::vector<GeoPoint> out;
  for (std::size_t h = 0; h < horizon; ++h) out.push_back(frame.to_geo({pred[0][h], pred[1][h], pred[2][h]}));
  return out;
}

std::vector<GeoPoint> last_velocity_baseline(const std::vector<GeoPoint>& obs, std::size_t horizon) {
  if (obs.size() < 2) throw InvalidArgument("last_velocity_baseline: need at least 2 observations");
  LocalFrame frame{obs.back(), std::cos(deg2rad(obs.back().lat))};
  const auto a = frame.to_local(obs[obs.size() - 2]);
  const auto b = frame.to_local(obs.back());
  std::vector<GeoPoint> out;
  for (std::size_t h = 1; h <= horizon; ++h) {
    const double k = static_cast<double>(h);
    out.push_back(frame.to_geo({b[0] + k * (b[0] - a[0]), b[1] + k * (b[1] - a[1]), b[2] + k * (b[2] - a[2])}));
  }
  return out;
}

}  // namespace flightpred::eval
