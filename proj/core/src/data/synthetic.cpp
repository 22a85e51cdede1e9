#include "flightpred/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "flightpred/error.hpp"
#include "flightpred/units.hpp"

namespace flightpred::data {

using units::deg2rad;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kSubsteps = 10;  // per 10 s report interval

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

GeoPoint offset_m(const GeoPoint& p, double north_m, double east_m) {
  GeoPoint q = p;
  q.lat += units::rad2deg(north_m / kEarthRadiusM);
  q.lon += units::rad2deg(east_m / (kEarthRadiusM * std::cos(deg2rad(p.lat))));
  return q;
}

struct ArrivalState {
  double s = 0.0;      // along-track distance to threshold
  double v = 0.0;      // ground speed
  double alt = 0.0;    // above threshold
  double glide = 3.0;  // deg
  bool yielding = false;
  double onset = kNaN;
};

}  // namespace

void ScenarioConfig::validate() const {
  if (n_arrivals + n_departures == 0) throw InvalidArgument("scenario needs at least one aircraft");
  if (steps < 1) throw InvalidArgument("scenario needs at least one step");
  if (noise_m < 0.0 || alt_noise_m < 0.0 || heading_noise_deg < 0.0) throw InvalidArgument("noise must be >= 0");
  if (glide_min_deg <= 0.0 || glide_max_deg < glide_min_deg || glide_max_deg >= 90.0) {
    throw InvalidArgument("glide angles must satisfy 0 < min <= max < 90");
  }
  if (climb_angle_min_deg <= 0.0 || climb_angle_deg < climb_angle_min_deg || climb_angle_deg >= 90.0) {
    throw InvalidArgument("climb angles must satisfy 0 < min <= max < 90");
  }
  if (lead_speed_min_mps <= 0.0 || lead_speed_max_mps < lead_speed_min_mps) throw InvalidArgument("bad lead speeds");
  if (closing_speed_min_mps < 0.0 || closing_speed_max_mps < closing_speed_min_mps) {
    throw InvalidArgument("bad closing speeds");
  }
  if (departure_speed_mps <= 0.0 || turn_rate_deg_s <= 0.0 || decel_mps2 <= 0.0) {
    throw InvalidArgument("speeds, turn rate and deceleration must be > 0");
  }
  flightpred::validate(airport);
}

Scenario gen_synthetic_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = kStepSeconds;
  const double sub = dt / kSubsteps;

  Scenario out;

  // Arrivals: arrival i trails arrival i - 1 on the same centerline.
  std::vector<ArrivalState> arr(cfg.n_arrivals);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    arr[i].glide = uniform(rng, cfg.glide_min_deg, cfg.glide_max_deg);
    if (i == 0) {
      arr[i].s = uniform(rng, cfg.lead_start_min_m, cfg.lead_start_max_m);
      arr[i].v = uniform(rng, cfg.lead_speed_min_mps, cfg.lead_speed_max_mps);
    } else {
      const double tau = uniform(rng, cfg.yield_onset_min_s, cfg.yield_onset_max_s);
      const double dv_cap = tau > 0.0 ? (cfg.max_initial_gap_m - cfg.yield_distance_m) / tau : cfg.closing_speed_max_mps;
      const double dv = uniform(rng, cfg.closing_speed_min_mps, std::max(cfg.closing_speed_min_mps,
                                                                          std::min(cfg.closing_speed_max_mps, dv_cap)));
      arr[i].v = arr[i - 1].v + dv;
      arr[i].s = arr[i - 1].s + cfg.yield_distance_m + tau * dv;
    }
    arr[i].alt = arr[i].s * std::tan(deg2rad(arr[i].glide));
  }

  std::vector<std::vector<GeoPoint>> truth(cfg.n_arrivals + cfg.n_departures);
  std::vector<std::vector<double>> speeds(truth.size()), vrates(truth.size()), headings(truth.size());

  auto arrival_point = [&](const ArrivalState& a) {
    GeoPoint p = destination(cfg.airport, cfg.runway_heading_deg + 180.0, std::max(0.0, a.s));
    p.alt = cfg.airport.alt + a.alt;
    return p;
  };

  for (std::size_t k = 0; k < cfg.steps; ++k) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
      truth[i].push_back(arrival_point(arr[i]));
      speeds[i].push_back(arr[i].v);
      vrates[i].push_back(arr[i].yielding ? 0.0 : -arr[i].v * std::tan(deg2rad(arr[i].glide)));
      headings[i].push_back(cfg.runway_heading_deg);
    }
    if (k + 1 == cfg.steps) break;
    for (int m = 0; m < kSubsteps; ++m) {
      const double t = static_cast<double>(k) * dt + static_cast<double>(m) * sub;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        auto& a = arr[i];
        if (i > 0 && cfg.yield) {
          const auto& lead = arr[i - 1];
          if (!a.yielding && a.s - lead.s < cfg.yield_distance_m) {
            a.yielding = true;
            a.onset = t;
          }
          if (a.yielding) a.v = std::max(lead.v, a.v - cfg.decel_mps2 * sub);
        }
        a.s -= a.v * sub;
        if (!a.yielding) a.alt = std::max(0.0, a.s) * std::tan(deg2rad(a.glide));
      }
    }
  }
  for (const auto& a : arr) out.yield_onset_s.push_back(a.onset);

  // Departures: straight climb to a TOC that falls on a report time, then a level turn.
  for (std::size_t j = 0; j < cfg.n_departures; ++j) {
    const std::size_t idx = cfg.n_arrivals + j;
    const double theta = deg2rad(uniform(rng, cfg.climb_angle_min_deg, cfg.climb_angle_deg));
    const double vh = cfg.departure_speed_mps * std::cos(theta);
    const double vz = cfg.departure_speed_mps * std::sin(theta);
    const double toc_steps = std::max(1.0, std::round(cfg.toc_alt_m / (vz * dt)));
    const double t_toc = toc_steps * dt;
    const GeoPoint toc = [&] {
      GeoPoint p = destination(cfg.airport, cfg.runway_heading_deg, vh * t_toc);
      p.alt = cfg.airport.alt + vz * t_toc;
      return p;
    }();
    const double turn_time = cfg.turn_total_deg / cfg.turn_rate_deg_s;

    GeoPoint level = toc;
    double heading = cfg.runway_heading_deg;
    double t_level = t_toc;
    for (std::size_t k = 0; k < cfg.steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      GeoPoint p;
      double h = cfg.runway_heading_deg;
      double vr = vz;
      if (t <= t_toc) {
        p = destination(cfg.airport, cfg.runway_heading_deg, vh * t);
        p.alt = cfg.airport.alt + vz * t;
        if (t == t_toc) vr = 0.0;
      } else {
        while (t_level < t - 1e-9) {
          const double step = std::min(sub / 10.0, t - t_level);
          const double in_turn = std::clamp(turn_time - (t_level - t_toc), 0.0, step);
          // Midpoint heading over the substep.
          const double mid_heading = heading + cfg.turn_rate_deg_s * in_turn / 2.0;
          level = destination(level, mid_heading, cfg.departure_speed_mps * step);
          heading += cfg.turn_rate_deg_s * in_turn;
          t_level += step;
        }
        p = level;
        p.alt = toc.alt;
        h = heading;
        vr = 0.0;
      }
      truth[idx].push_back(p);
      speeds[idx].push_back(t <= t_toc ? vh : cfg.departure_speed_mps);
      vrates[idx].push_back(vr);
      headings[idx].push_back(normalize_heading_deg(h));
    }
  }

  // Reports with noise.
  for (std::size_t f = 0; f < truth.size(); ++f) {
    const bool is_arrival = f < cfg.n_arrivals;
    Flight fl;
    fl.id = is_arrival ? "A" + std::to_string(f + 1) : "D" + std::to_string(f - cfg.n_arrivals + 1);
    fl.actype = cfg.actype;
    for (std::size_t k = 0; k < truth[f].size(); ++k) {
      GeoPoint p = truth[f][k];
      if (cfg.noise_m > 0.0) p = offset_m(p, cfg.noise_m * normal(rng), cfg.noise_m * normal(rng));
      if (cfg.alt_noise_m > 0.0) p.alt += cfg.alt_noise_m * normal(rng);
      double hdg = headings[f][k];
      if (cfg.heading_noise_deg > 0.0) hdg = normalize_heading_deg(hdg + cfg.heading_noise_deg * normal(rng));
      TrackPoint tp;
      tp.timestamp = cfg.start_time + static_cast<double>(k) * dt;
      tp.flight_id = fl.id;
      tp.lat = p.lat;
      tp.lon = p.lon;
      tp.alt_ft = units::m2ft(p.alt);
      tp.gs_kt = units::mps2kt(speeds[f][k]);
      tp.vrate_fpm = units::mps2fpm(vrates[f][k]);
      tp.heading_deg = hdg;
      tp.actype = cfg.actype;
      fl.points.push_back(std::move(tp));
      fl.phases.push_back(is_arrival ? phase::Phase::approach : phase::Phase::takeoff);
    }
    out.flights.push_back(std::move(fl));
  }
  out.truth = std::move(truth);
  return out;
}

std::vector<Scenario> gen_synthetic_scenarios(const ScenarioConfig& cfg, std::size_t count) {
  std::vector<Scenario> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    ScenarioConfig c = cfg;
    c.seed = cfg.seed + k;
    c.start_time = cfg.start_time + 3600.0 * static_cast<double>(k);
    Scenario s = gen_synthetic_scenario(c);
    const std::string prefix = "S" + std::to_string(k) + "-";
    for (auto& f : s.flights) {
      f.id = prefix + f.id;
      for (auto& p : f.points) p.flight_id = f.id;
    }
    out.push_back(std::move(s));
  }
  return out;
}

double min_pairwise_separation(const Scenario& s) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t n_arr = 0;
  for (const auto& f : s.flights) n_arr += (!f.phases.empty() && f.phases.front() == phase::Phase::approach) ? 1 : 0;
  for (std::size_t i = 0; i < n_arr; ++i) {
    for (std::size_t j = i + 1; j < n_arr; ++j) {
      const std::size_t n = std::min(s.truth[i].size(), s.truth[j].size());
      for (std::size_t k = 0; k < n; ++k) best = std::min(best, distance_3d(s.truth[i][k], s.truth[j][k]));
    }
  }
  return best;
}

Flight make_climb_cruise_descend(const ProfileConfig& cfg) {
  if (!(cfg.climb_fpm > 0.0) || !(cfg.descent_fpm < 0.0)) throw InvalidArgument("profile rates have wrong sign");
  if (!(cfg.cruise_alt_ft > cfg.start_alt_ft && cfg.cruise_alt_ft > cfg.end_alt_ft)) {
    throw InvalidArgument("cruise altitude must exceed start and end altitudes");
  }
  const double dt = kStepSeconds;
  const double t_climb = (cfg.cruise_alt_ft - cfg.start_alt_ft) / cfg.climb_fpm * 60.0;
  const double t_cruise_end = std::ceil(t_climb / dt) * dt + static_cast<double>(cfg.cruise_steps) * dt;
  const double t_descent = (cfg.end_alt_ft - cfg.cruise_alt_ft) / cfg.descent_fpm * 60.0;
  const double t_end = t_cruise_end + t_descent;

  auto speed_for = [&](double alt_ft) {
    const double f = (alt_ft - std::min(cfg.start_alt_ft, cfg.end_alt_ft)) /
                     (cfg.cruise_alt_ft - std::min(cfg.start_alt_ft, cfg.end_alt_ft));
    return cfg.low_speed_kt + std::clamp(f, 0.0, 1.0) * (cfg.cruise_speed_kt - cfg.low_speed_kt);
  };

  Flight fl;
  fl.id = cfg.id;
  fl.actype = "A320";
  GeoPoint pos = cfg.origin;
  for (double t = 0.0; t <= t_end + 1e-9; t += dt) {
    double alt_ft, vrate;
    phase::Phase ph;
    if (t < t_climb) {
      alt_ft = cfg.start_alt_ft + cfg.climb_fpm * t / 60.0;
      vrate = cfg.climb_fpm;
      ph = phase::Phase::takeoff;
    } else if (t < t_cruise_end) {
      alt_ft = cfg.cruise_alt_ft;
      vrate = 0.0;
      ph = phase::Phase::enroute;
    } else {
      alt_ft = cfg.cruise_alt_ft + cfg.descent_fpm * (t - t_cruise_end) / 60.0;
      vrate = cfg.descent_fpm;
      ph = phase::Phase::approach;
    }
    const double gs = speed_for(alt_ft);
    TrackPoint p;
    p.timestamp = cfg.start_time + t;
    p.flight_id = fl.id;
    p.lat = pos.lat;
    p.lon = pos.lon;
    p.alt_ft = alt_ft;
    p.gs_kt = gs;
    p.vrate_fpm = vrate;
    p.heading_deg = cfg.heading_deg;
    p.actype = fl.actype;
    fl.points.push_back(p);
    fl.phases.push_back(ph);
    pos = destination(pos, cfg.heading_deg, units::kt2mps(gs) * dt);
  }
  return fl;
}

}  // namespace flightpred::data
