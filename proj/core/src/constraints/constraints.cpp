#include "flightpred/constraints/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "flightpred/error.hpp"
#include "flightpred/units.hpp"

namespace flightpred::constraints {

using units::deg2rad;
using units::rad2deg;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kFormatTag = "flightpred-constraints";
constexpr int kFormatVersion = 1;
constexpr double kMinFitDistanceM = 1e-3;

double angle_between(const GeoPoint& a, const GeoPoint& b) {
  const double d = haversine(a, b);
  return rad2deg(std::atan2(b.alt - a.alt, d));
}

double at_or_nan(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : kNaN; }

}  // namespace

void ConstraintSet::validate() const {
  if (!(theta_c > 0.0 && theta_c < 90.0)) throw InvalidArgument("theta_c must lie in (0, 90) deg");
  if (!(theta_d > 0.0 && theta_d < 90.0)) throw InvalidArgument("theta_d must lie in (0, 90) deg");
  if (!(omega_rot > 0.0) || !std::isfinite(omega_rot)) throw InvalidArgument("omega_rot must be > 0");
  if (max_resample < 1) throw InvalidArgument("max_resample must be >= 1");
}

double climb_angle_deg(const LabeledTrack& track, std::vector<std::string>* warnings) {
  const auto& pts = track.points;
  if (pts.empty()) return kNaN;
  std::size_t toc = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].alt > pts[toc].alt) toc = i;
  }
  std::size_t start = pts.size();
  for (std::size_t i = 0; i <= toc; ++i) {
    if (pts[i].alt > kClimbFitFloorM) {
      start = i;
      break;
    }
  }
  if (start >= pts.size()) {
    if (warnings) warnings->push_back("track '" + track.id + "': no point above 1500 ft before TOC");
    return kNaN;
  }
  // Level at the floor: TOC is the first qualifying point.
  if (pts[toc].alt == pts[start].alt) return 0.0;
  if (haversine(pts[start], pts[toc]) < kMinFitDistanceM) {
    if (warnings) warnings->push_back("track '" + track.id + "': zero horizontal distance to TOC, skipped");
    return kNaN;
  }
  return angle_between(pts[start], pts[toc]);
}

double descend_angle_deg(const LabeledTrack& track, std::vector<std::string>* warnings) {
  const auto& pts = track.points;
  if (pts.empty()) return kNaN;
  std::size_t tod = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].alt >= pts[tod].alt) tod = i;
  }
  std::size_t end = pts.size();
  for (std::size_t i = pts.size(); i-- > tod;) {
    if (pts[i].alt > kClimbFitFloorM) {
      end = i;
      break;
    }
  }
  if (end >= pts.size()) {
    if (warnings) warnings->push_back("track '" + track.id + "': no point above 1500 ft after TOD");
    return kNaN;
  }
  if (pts[tod].alt == pts[end].alt) return 0.0;
  if (haversine(pts[tod], pts[end]) < kMinFitDistanceM) {
    if (warnings) warnings->push_back("track '" + track.id + "': zero horizontal distance from TOD, skipped");
    return kNaN;
  }
  return -angle_between(pts[tod], pts[end]);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

AngleFit summarize(const std::vector<double>& angles) {
  AngleFit f;
  f.flights_used = angles.size();
  f.max_deg = *std::max_element(angles.begin(), angles.end());
  f.p995_deg = percentile(angles, 99.5);
  return f;
}

}  // namespace

ClimbDescendFit fit_climb_descend(const std::vector<LabeledTrack>& tracks) {
  ClimbDescendFit fit;
  std::vector<double> climbs, descends;
  for (const auto& t : tracks) {
    if (t.phase == phase::Phase::takeoff) {
      const double a = climb_angle_deg(t, &fit.warnings);
      if (std::isfinite(a)) climbs.push_back(a);
    } else if (t.phase == phase::Phase::approach) {
      const double a = descend_angle_deg(t, &fit.warnings);
      if (std::isfinite(a)) descends.push_back(a);
    }
  }
  if (climbs.empty()) throw DataError("fit_climb_descend: no qualifying takeoff flights");
  if (descends.empty()) throw DataError("fit_climb_descend: no qualifying approach flights");
  fit.climb = summarize(climbs);
  fit.descend = summarize(descends);
  return fit;
}

double rate_of_turn_from_bank(double bank_deg, double speed_kt) {
  if (!(speed_kt > 0.0)) throw InvalidArgument("rate_of_turn_from_bank: speed must be > 0 kt");
  return 1091.0 * std::tan(deg2rad(bank_deg)) / speed_kt;
}

RotFit fit_rot(const std::vector<LabeledTrack>& tracks) {
  RotFit fit;
  std::vector<double> rates;
  for (const auto& t : tracks) {
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const double bank = at_or_nan(t.bank_deg, i);
      const double v = at_or_nan(t.speed_kt, i);
      if (std::isfinite(bank) && std::isfinite(v) && v > 0.0) {
        rates.push_back(std::abs(rate_of_turn_from_bank(bank, v)));
        fit.from_bank = true;
        continue;
      }
      if (i + 1 >= t.points.size() || i + 1 >= t.time_s.size()) continue;
      const double h0 = at_or_nan(t.heading_deg, i);
      const double h1 = at_or_nan(t.heading_deg, i + 1);
      const double dt = t.time_s[i + 1] - t.time_s[i];
      if (!std::isfinite(h0) || !std::isfinite(h1) || !(dt > 0.0)) continue;
      rates.push_back(std::abs(wrap_angle_deg(h1 - h0)) / dt);
    }
  }
  if (rates.empty()) throw DataError("constraints unavailable: no heading or bank data");
  fit.samples = rates.size();
  fit.max_deg_s = *std::max_element(rates.begin(), rates.end());
  fit.p995_deg_s = percentile(rates, 99.5);
  return fit;
}

ConstraintSet make_constraint_set(const ClimbDescendFit& angles, const RotFit& rot, FitStatistic statistic,
                                  std::string tag) {
  ConstraintSet cs;
  const bool use_max = statistic == FitStatistic::max;
  cs.theta_c = use_max ? angles.climb.max_deg : angles.climb.p995_deg;
  cs.theta_d = use_max ? angles.descend.max_deg : angles.descend.p995_deg;
  cs.omega_rot = use_max ? rot.max_deg_s : rot.p995_deg_s;
  cs.fitted_from = std::move(tag);
  cs.validate();
  return cs;
}

CheckReport check(const GeoPoint& prev, double prev_heading_deg, const GeoPoint& cand, phase::Phase phase,
                  const ConstraintSet& cs, double dt_s) {
  if (!(dt_s > 0.0)) throw InvalidArgument("check: dt must be > 0");
  CheckReport r;
  if (phase == phase::Phase::enroute) return r;

  const double d = haversine(prev, cand);
  const double dz = cand.alt - prev.alt;
  if (d == 0.0) {
    if (dz != 0.0) {
      r.pass = false;
      r.vertical_jump = true;
      r.angle_deg = dz > 0.0 ? 90.0 : -90.0;
      const double limit = dz > 0.0 ? cs.theta_c : cs.theta_d;
      r.angle_excess = 90.0 - limit;
      r.violation = r.angle_excess / limit;
      r.reason = "vertical jump";
    }
    return r;
  }

  r.angle_deg = rad2deg(std::atan2(dz, d));
  const double limit = r.angle_deg >= 0.0 ? cs.theta_c : cs.theta_d;
  r.angle_excess = std::max(0.0, std::abs(r.angle_deg) - limit);

  if (std::isfinite(prev_heading_deg)) {
    const double bearing = initial_bearing(prev, cand);
    r.turn_rate_deg_s = std::abs(wrap_angle_deg(bearing - prev_heading_deg)) / dt_s;
    r.turn_excess = std::max(0.0, r.turn_rate_deg_s - cs.omega_rot);
  }

  r.violation = r.angle_excess / limit + r.turn_excess / cs.omega_rot;
  if (r.angle_excess > 0.0) {
    r.pass = false;
    r.reason = r.angle_deg >= 0.0 ? "climb angle" : "descend angle";
  }
  if (r.turn_excess > 0.0) {
    r.pass = false;
    r.reason += r.reason.empty() ? "rate of turn" : ", rate of turn";
  }
  return r;
}

InferResult infer_step(const nn::GaussianParams3& dist, const GeoPoint& prev, double prev_heading_deg,
                       phase::Phase phase, const ConstraintSet& cs, double dt_s, nn::Rng& rng) {
  if (cs.max_resample < 1) throw InvalidArgument("infer_step: max_resample must be >= 1");
  InferResult best;
  best.passed = false;
  double best_violation = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cs.max_resample; ++k) {
    const nn::Vec3 s = nn::gaussian3_sample(dist, rng);
    GeoPoint cand{std::clamp(s[0], -90.0, 90.0), s[1], s[2]};
    cand.lon = wrap_angle_deg(cand.lon);
    if (cand.lon == 180.0) cand.lon = -180.0;
    CheckReport report = check(prev, prev_heading_deg, cand, phase, cs, dt_s);
    if (report.pass) return InferResult{cand, true, k, std::move(report)};
    if (report.violation < best_violation) {
      best_violation = report.violation;
      best.point = cand;
      best.report = std::move(report);
    }
    best.samples_drawn = k;
  }
  return best;
}

void write_constraint_set(std::ostream& os, const ConstraintSet& cs) {
  os << "format = " << kFormatTag << '\n';
  os << "version = " << kFormatVersion << '\n';
  os << std::setprecision(17);
  os << "theta_c_deg = " << cs.theta_c << '\n';
  os << "theta_d_deg = " << cs.theta_d << '\n';
  os << "omega_rot_deg_s = " << cs.omega_rot << '\n';
  os << "max_resample = " << cs.max_resample << '\n';
  os << "fitted_from = " << cs.fitted_from << '\n';
}

ConstraintSet read_constraint_set(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("constraint file: malformed line '" + line + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("constraint file: missing key '" + key + "'");
    return it->second;
  };
  if (need("format") != kFormatTag) throw DataError("constraint file: unexpected format tag");
  if (need("version") != std::to_string(kFormatVersion)) throw DataError("constraint file: unsupported version");
  ConstraintSet cs;
  try {
    cs.theta_c = std::stod(need("theta_c_deg"));
    cs.theta_d = std::stod(need("theta_d_deg"));
    cs.omega_rot = std::stod(need("omega_rot_deg_s"));
    cs.max_resample = std::stoi(need("max_resample"));
  } catch (const std::logic_error&) {
    throw DataError("constraint file: non-numeric value");
  }
  if (auto it = kv.find("fitted_from"); it != kv.end()) cs.fitted_from = it->second;
  try {
    cs.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("constraint file: ") + e.what());
  }
  return cs;
}

void save_constraint_set(const std::string& path, const ConstraintSet& cs) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_constraint_set(os, cs);
  if (!os) throw IoError("write failed: " + path);
}

ConstraintSet load_constraint_set(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_constraint_set(is);
}

}  // namespace flightpred::constraints
