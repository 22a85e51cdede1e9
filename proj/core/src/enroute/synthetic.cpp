#include "flightpred/enroute/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flightpred/error.hpp"
#include "flightpred/units.hpp"

namespace flightpred::enroute {

void EnrouteScenarioConfig::validate() const {
  if (t_obs < 2 || horizon < 1) throw InvalidArgument("enroute scenarios: need t_obs >= 2 and horizon >= 1");
  if (!(dt_s > 0.0) || !(cell_deg > 0.0)) throw InvalidArgument("enroute scenarios: dt and cell size must be positive");
  if (!(speed_max_mps >= speed_min_mps && speed_min_mps > 0.0)) throw InvalidArgument("enroute scenarios: bad speed range");
  if (noise_m < 0.0 || alt_noise_m < 0.0) throw InvalidArgument("enroute scenarios: noise must be >= 0");
  if (cell_probability < 0.0 || cell_probability > 1.0) throw InvalidArgument("enroute scenarios: bad cell probability");
  if (!(detour_half_length_m > 0.0) || !(cell_radius_m > 0.0)) {
    throw InvalidArgument("enroute scenarios: detour length and cell radius must be positive");
  }
}

namespace {

using units::deg2rad;

struct Wave {
  double kx, ky, phase;
};

struct ChannelModel {
  double base, amp;
  std::array<Wave, 3> waves;
  double operator()(double lat, double lon) const {
    double s = 0.0;
    for (const auto& w : waves) s += std::sin(w.kx * lon + w.ky * lat + w.phase);
    return base + amp * s / 3.0;
  }
};

constexpr std::array<std::array<double, 2>, kWeatherChannels> kBackground = {{
    {10600.0, 80.0},   // HGT gpm
    {219.0, 4.0},      // TMP K
    {45.0, 20.0},      // RH %
    {0.0, 0.3},        // VVEL Pa/s
    {18.0, 10.0},      // UGRD m/s
    {0.0, 8.0},        // VGRD m/s
    {1e-4, 5e-5},      // ABSV 1/s
}};

double bump(double u) { return std::abs(u) < 1.0 ? 0.5 * (1.0 + std::cos(units::kPi * u)) : 0.0; }

GeoPoint route_point(const GeoPoint& origin, double heading, double along, double cross) {
  const GeoPoint a = destination(origin, heading, along);
  const double hb = initial_bearing(a, destination(origin, heading, along + 1000.0));
  return cross == 0.0 ? a : destination(a, hb + 90.0, cross);
}

}  // namespace

std::vector<EnrouteScenario> gen_enroute_scenarios(const EnrouteScenarioConfig& cfg) {
  cfg.validate();
  std::vector<EnrouteScenario> out;
  out.reserve(cfg.count);
  const std::size_t N = cfg.t_obs + cfg.horizon;
  const double alt = units::ft2m(cfg.level_ft);
  for (std::size_t k = 0; k < cfg.count; ++k) {
    std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(k)};
    std::mt19937_64 rng(seq);
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    std::normal_distribution<double> gauss(0.0, 1.0);

    EnrouteScenario sc;
    sc.flight_id = "E" + std::to_string(k);
    const GeoPoint p0{U(cfg.lat_min, cfg.lat_max), U(cfg.lon_min, cfg.lon_max), alt};
    const double heading = U(cfg.heading_min_deg, cfg.heading_max_deg);
    const double step = U(cfg.speed_min_mps, cfg.speed_max_mps) * cfg.dt_s;

    const bool has_cell = U(0.0, 1.0) < cfg.cell_probability;
    const double side = U(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    const double cross = side * U(cfg.cross_min_m, cfg.cross_max_m);
    const double x_cell = step * static_cast<double>(cfg.t_obs - 1) + U(cfg.ahead_min_m, cfg.ahead_max_m);
    const double strength = U(cfg.cell_strength_min, cfg.cell_strength_max);
    if (has_cell) {
      sc.detour_m = -side * cfg.detour_gain * strength * std::max(0.0, cfg.avoid_radius_m - std::abs(cross));
    }
    const GeoPoint cell = route_point(p0, heading, x_cell, cross);

    for (std::size_t i = 0; i < N; ++i) {
      const double x = step * static_cast<double>(i);
      const double off = sc.detour_m * bump((x - x_cell) / cfg.detour_half_length_m);
      GeoPoint p = route_point(p0, heading, x, off);
      p.alt = alt;
      sc.truth.push_back(p);
    }
    for (const auto& t : sc.truth) {
      GeoPoint p = destination(t, 0.0, cfg.noise_m * gauss(rng));
      p = destination(p, 90.0, cfg.noise_m * gauss(rng));
      p.alt = alt + cfg.alt_noise_m * gauss(rng);
      sc.track.push_back(p);
    }
    sc.plan = data::plan_from_points({p0, destination(p0, heading, step * static_cast<double>(N) + 50000.0)},
                                     sc.flight_id);

    // Field bbox: every reported point plus a margin, snapped to the grid.
    double la0 = cell.lat, la1 = cell.lat, lo0 = cell.lon, lo1 = cell.lon;
    for (const auto& p : sc.track) {
      la0 = std::min(la0, p.lat);
      la1 = std::max(la1, p.lat);
      lo0 = std::min(lo0, p.lon);
      lo1 = std::max(lo1, p.lon);
    }
    const double c = cfg.cell_deg;
    const double lat0 = std::floor((la0 - cfg.field_margin_deg) / c) * c;
    const double lon0 = std::floor((lo0 - cfg.field_margin_deg) / c) * c;
    const auto ny = static_cast<std::size_t>(std::ceil((la1 + cfg.field_margin_deg - lat0) / c)) + 1;
    const auto nx = static_cast<std::size_t>(std::ceil((lo1 + cfg.field_margin_deg - lon0) / c)) + 1;
    sc.field = WeatherGrid::zeros(nx, ny, lat0, lon0, lat0 + c * static_cast<double>(ny - 1),
                                  lon0 + c * static_cast<double>(nx - 1), cfg.level_ft);

    std::array<ChannelModel, kWeatherChannels> models;
    for (std::size_t ch = 0; ch < kWeatherChannels; ++ch) {
      models[ch].base = kBackground[ch][0];
      models[ch].amp = kBackground[ch][1];
      for (auto& w : models[ch].waves) {
        const double wavelength = U(2.0, 8.0), dir = U(0.0, 2.0 * units::kPi);
        w = {2.0 * units::kPi / wavelength * std::cos(dir), 2.0 * units::kPi / wavelength * std::sin(dir),
             U(0.0, 2.0 * units::kPi)};
      }
    }
    for (std::size_t r = 0; r < ny; ++r) {
      for (std::size_t col = 0; col < nx; ++col) {
        const GeoPoint node{sc.field.lat_of(r), sc.field.lon_of(col), alt};
        double g = 0.0;
        if (has_cell) {
          const double d = haversine(node, cell) / cfg.cell_radius_m;
          g = strength * std::exp(-0.5 * d * d);
        }
        for (std::size_t ch = 0; ch < kWeatherChannels; ++ch) {
          double v = models[ch](node.lat, node.lon);
          if (ch == kVVEL) v += cfg.cell_vvel_pa_s * g;
          if (ch == kRH) v = std::min(100.0, v + 40.0 * g);
          if (ch == kABSV) v += 2e-4 * g;
          sc.field.at(ch, r, col) = static_cast<float>(v);
        }
      }
    }
    out.push_back(std::move(sc));
  }
  return out;
}

EnrouteSample make_enroute_sample(const EnrouteScenario& sc, std::size_t t_obs, std::size_t window) {
  if (sc.track.size() <= t_obs) throw InvalidArgument("make_enroute_sample: track shorter than the observation window");
  EnrouteSample s;
  s.flight_id = sc.flight_id;
  s.plan = sc.plan;
  s.observed.assign(sc.track.begin(), sc.track.begin() + static_cast<std::ptrdiff_t>(t_obs));
  s.target.assign(sc.track.begin() + static_cast<std::ptrdiff_t>(t_obs), sc.track.end());
  for (const auto& p : s.observed) s.weather.push_back(extract_window(sc.field, p, window));
  return s;
}

}  // namespace flightpred::enroute
