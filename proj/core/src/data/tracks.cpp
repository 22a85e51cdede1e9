#include "flightpred/data/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "flightpred/error.hpp"
#include "flightpred/textio.hpp"
#include "flightpred/units.hpp"

namespace flightpred::data {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxMessages = 20;

bool same_or_both_nan(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

GeoPoint TrackPoint::geo() const { return {lat, lon, units::ft2m(alt_ft)}; }

bool operator==(const TrackPoint& a, const TrackPoint& b) {
  return a.timestamp == b.timestamp && a.flight_id == b.flight_id && a.lat == b.lat && a.lon == b.lon &&
         a.alt_ft == b.alt_ft && a.gs_kt == b.gs_kt && a.vrate_fpm == b.vrate_fpm &&
         same_or_both_nan(a.heading_deg, b.heading_deg) && a.actype == b.actype &&
         same_or_both_nan(a.bank_deg, b.bank_deg);
}

std::vector<GeoPoint> Flight::geo_points() const {
  std::vector<GeoPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.geo());
  return out;
}

std::vector<double> Flight::times() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.timestamp);
  return out;
}

ParseResult parse_tracks(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!textio::trim(line).empty()) break;
  }
  if (textio::trim(line).empty()) throw DataError("track file is empty (no header)");

  const auto header = textio::split(line);
  std::map<std::string, std::size_t, std::less<>> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
  std::vector<std::string> missing;
  for (const char* name : {"timestamp", "flight_id", "lat", "lon", "alt_ft", "gs_kt", "vrate_fpm"}) {
    if (!col.count(name)) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "track file is missing mandatory columns:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  auto optional_col = [&](const char* name) -> std::ptrdiff_t {
    auto it = col.find(name);
    return it == col.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  };
  const std::ptrdiff_t c_heading = optional_col("heading_deg");
  const std::ptrdiff_t c_actype = optional_col("actype");
  const std::ptrdiff_t c_bank = optional_col("bank_deg");
  const std::ptrdiff_t c_phase = optional_col("phase");
  const std::ptrdiff_t c_act = optional_col("activation");

  ParseResult result;
  struct Row {
    TrackPoint p;
    std::optional<phase::Phase> ph;
    double act = kNaN;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows;

  auto reject = [&](const std::string& why) {
    ++result.report.malformed;
    if (result.report.messages.size() < kMaxMessages) {
      result.report.messages.push_back("line " + std::to_string(line_no) + ": " + why);
    }
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (textio::trim(line).empty()) continue;
    ++result.report.rows;
    const auto f = textio::split(line);
    if (f.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
      continue;
    }
    Row r;
    bool ok = true;
    auto num = [&](const char* name, double& out) {
      auto v = textio::parse_double(f[col.find(name)->second]);
      if (!v || !std::isfinite(*v)) {
        ok = false;
        return;
      }
      out = *v;
    };
    num("timestamp", r.p.timestamp);
    num("lat", r.p.lat);
    num("lon", r.p.lon);
    num("alt_ft", r.p.alt_ft);
    num("gs_kt", r.p.gs_kt);
    num("vrate_fpm", r.p.vrate_fpm);
    if (!ok) {
      reject("non-numeric field");
      continue;
    }
    r.p.flight_id = std::string(f[col.find("flight_id")->second]);
    if (r.p.flight_id.empty()) {
      reject("empty flight_id");
      continue;
    }
    if (r.p.lat < -90.0 || r.p.lat > 90.0 || r.p.lon < -180.0 || r.p.lon > 180.0) {
      reject("coordinates out of range");
      continue;
    }
    if (r.p.lon == 180.0) r.p.lon = -180.0;
    auto optional_num = [&](std::ptrdiff_t c, double& out) {
      if (c < 0 || f[static_cast<std::size_t>(c)].empty()) return;
      auto v = textio::parse_double(f[static_cast<std::size_t>(c)]);
      if (!v || !std::isfinite(*v)) {
        ok = false;
        return;
      }
      out = *v;
    };
    optional_num(c_heading, r.p.heading_deg);
    optional_num(c_bank, r.p.bank_deg);
    optional_num(c_act, r.act);
    if (!ok) {
      reject("non-numeric optional field");
      continue;
    }
    if (c_actype >= 0) r.p.actype = std::string(f[static_cast<std::size_t>(c_actype)]);
    if (c_phase >= 0 && !f[static_cast<std::size_t>(c_phase)].empty()) {
      try {
        r.ph = phase::phase_from_string(f[static_cast<std::size_t>(c_phase)]);
      } catch (const InvalidArgument&) {
        reject("unknown phase label");
        continue;
      }
    }
    auto [it, inserted] = rows.try_emplace(r.p.flight_id);
    if (inserted) order.push_back(r.p.flight_id);
    it->second.push_back(std::move(r));
  }

  for (const auto& id : order) {
    auto& rs = rows[id];
    std::stable_sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) { return a.p.timestamp < b.p.timestamp; });
    Flight fl;
    fl.id = id;
    fl.actype = rs.front().p.actype;
    const bool all_phase = std::all_of(rs.begin(), rs.end(), [](const Row& r) { return r.ph.has_value(); });
    const bool all_act = std::all_of(rs.begin(), rs.end(), [](const Row& r) { return !std::isnan(r.act); });
    for (auto& r : rs) {
      if (all_phase) fl.phases.push_back(*r.ph);
      if (all_act) fl.activation.push_back(r.act);
      fl.points.push_back(std::move(r.p));
    }
    result.flights.push_back(std::move(fl));
  }
  return result;
}

ParseResult parse_tracks_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open track file '" + path + "'");
  return parse_tracks(is);
}

void write_tracks(std::ostream& os, const std::vector<Flight>& flights) {
  bool any_bank = false, any_phase = false, any_act = false;
  for (const auto& f : flights) {
    any_phase = any_phase || !f.phases.empty();
    any_act = any_act || !f.activation.empty();
    for (const auto& p : f.points) any_bank = any_bank || !std::isnan(p.bank_deg);
  }
  os << "timestamp,flight_id,lat,lon,alt_ft,gs_kt,vrate_fpm,heading_deg,actype";
  if (any_bank) os << ",bank_deg";
  if (any_phase) os << ",phase";
  if (any_act) os << ",activation";
  os << '\n';
  using textio::format_double;
  auto opt = [](double v) { return std::isnan(v) ? std::string{} : format_double(v); };
  for (const auto& f : flights) {
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      const auto& p = f.points[i];
      os << format_double(p.timestamp) << ',' << p.flight_id << ',' << format_double(p.lat) << ','
         << format_double(p.lon) << ',' << format_double(p.alt_ft) << ',' << format_double(p.gs_kt) << ','
         << format_double(p.vrate_fpm) << ',' << opt(p.heading_deg) << ',' << p.actype;
      if (any_bank) os << ',' << opt(p.bank_deg);
      if (any_phase) os << ',' << (i < f.phases.size() ? phase::to_string(f.phases[i]) : "");
      if (any_act) os << ',' << (i < f.activation.size() ? format_double(f.activation[i]) : "");
      os << '\n';
    }
  }
}

void write_tracks_file(const std::string& path, const std::vector<Flight>& flights) {
  std::ostringstream ss;
  write_tracks(ss, flights);
  textio::write_file(path, ss.str());
}

std::vector<Flight> filter_trainers(const std::vector<Flight>& flights, const Blocklist& blocklist) {
  std::vector<Flight> out;
  for (const auto& f : flights) {
    if (blocklist.ids.count(f.id)) continue;
    if (!f.actype.empty() && blocklist.types.count(f.actype)) continue;
    out.push_back(f);
  }
  return out;
}

namespace {

Flight slice_flight(const Flight& f, std::size_t begin, std::size_t end) {
  Flight out;
  out.id = f.id;
  out.actype = f.actype;
  out.points.assign(f.points.begin() + static_cast<std::ptrdiff_t>(begin),
                    f.points.begin() + static_cast<std::ptrdiff_t>(end));
  if (f.phases.size() == f.points.size()) {
    out.phases.assign(f.phases.begin() + static_cast<std::ptrdiff_t>(begin),
                      f.phases.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (f.activation.size() == f.points.size()) {
    out.activation.assign(f.activation.begin() + static_cast<std::ptrdiff_t>(begin),
                          f.activation.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace

std::vector<Flight> split_on_gaps(const Flight& flight, double max_gap_s) {
  std::vector<Flight> out;
  if (flight.points.empty()) return out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= flight.points.size(); ++i) {
    if (i == flight.points.size() || flight.points[i].timestamp - flight.points[i - 1].timestamp > max_gap_s) {
      out.push_back(slice_flight(flight, begin, i));
      begin = i;
    }
  }
  if (out.size() > 1) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id = flight.id + "#" + std::to_string(k + 1);
  }
  return out;
}

namespace {

Flight resample_piece(const Flight& f) {
  const auto& pts = f.points;
  const double t0 = pts.front().timestamp;
  const double t1 = pts.back().timestamp;
  const double anchor = std::ceil(t0 / kStepSeconds) * kStepSeconds;
  Flight out;
  out.id = f.id;
  out.actype = f.actype;
  const bool has_phase = f.phases.size() == pts.size();
  std::size_t seg = 0;
  for (long k = 0;; ++k) {
    const double t = anchor + kStepSeconds * static_cast<double>(k);
    if (t > t1) break;
    while (seg + 1 < pts.size() && pts[seg + 1].timestamp <= t) ++seg;
    TrackPoint p = pts[seg];
    p.timestamp = t;
    p.bank_deg = kNaN;
    if (pts[seg].timestamp != t && seg + 1 < pts.size()) {
      const auto& a = pts[seg];
      const auto& b = pts[seg + 1];
      const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
      p.lat = a.lat + w * (b.lat - a.lat);
      p.lon = a.lon + w * wrap_angle_deg(b.lon - a.lon);
      if (p.lon >= 180.0) p.lon -= 360.0;
      if (p.lon < -180.0) p.lon += 360.0;
      p.alt_ft = a.alt_ft + w * (b.alt_ft - a.alt_ft);
    }
    out.points.push_back(p);
    if (has_phase) out.phases.push_back(f.phases[seg]);
  }

  // Derived fields from the grid itself.
  for (std::size_t i = 0; i < out.points.size() && out.points.size() >= 2; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i == 0 ? 1 : i;
    const GeoPoint ga = out.points[a].geo();
    const GeoPoint gb = out.points[b].geo();
    out.points[i].gs_kt = units::mps2kt(haversine(ga, gb) / kStepSeconds);
    out.points[i].vrate_fpm = units::mps2fpm((gb.alt - ga.alt) / kStepSeconds);
    if (ga.lat != gb.lat || ga.lon != gb.lon) {
      out.points[i].heading_deg = initial_bearing(ga, gb);
    } else {
      out.points[i].heading_deg = i > 0 ? out.points[i - 1].heading_deg : kNaN;
    }
  }
  return out;
}

}  // namespace

std::vector<Flight> resample_10s(const Flight& flight) {
  if (flight.points.size() < 2) throw InvalidArgument("resample_10s: flight '" + flight.id + "' has fewer than 2 points");
  Flight sorted = flight;
  if (!std::is_sorted(sorted.points.begin(), sorted.points.end(),
                      [](const TrackPoint& a, const TrackPoint& b) { return a.timestamp < b.timestamp; })) {
    std::vector<std::size_t> idx(sorted.points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return flight.points[a].timestamp < flight.points[b].timestamp;
    });
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sorted.points[i] = flight.points[idx[i]];
      if (flight.phases.size() == idx.size()) sorted.phases[i] = flight.phases[idx[i]];
    }
    sorted.activation.clear();
  }
  std::vector<Flight> out;
  for (const auto& piece : split_on_gaps(sorted)) {
    if (piece.points.size() < 2) continue;
    Flight r = resample_piece(piece);
    if (r.points.size() >= 2) out.push_back(std::move(r));
  }
  return out;
}

std::int64_t day_of(double timestamp) { return static_cast<std::int64_t>(std::floor(timestamp / 86400.0)); }

std::array<std::size_t, 3> split_counts(std::size_t n_days, double r_train, double r_val, double r_test) {
  if (r_train < 0.0 || r_val < 0.0 || r_test < 0.0 || std::abs(r_train + r_val + r_test - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must be nonnegative and sum to 1");
  }
  const auto n = static_cast<double>(n_days);
  std::size_t a = static_cast<std::size_t>(std::llround(n * r_train));
  std::size_t b = static_cast<std::size_t>(std::llround(n * r_val));
  a = std::min(a, n_days);
  b = std::min(b, n_days - a);
  return {a, b, n_days - a - b};
}

DaySplit split_by_days(const std::vector<Flight>& flights, double r_train, double r_val, double r_test,
                       std::uint64_t seed) {
  std::vector<std::int64_t> days;
  for (const auto& f : flights) {
    if (f.points.empty()) continue;
    days.push_back(day_of(f.points.front().timestamp));
  }
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  if (days.size() < 3) throw InvalidArgument("split_by_days: fewer distinct days than splits");
  const auto counts = split_counts(days.size(), r_train, r_val, r_test);

  // Fisher-Yates with a portable index draw.
  std::mt19937_64 rng(seed);
  for (std::size_t i = days.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(days[i], days[j]);
  }

  DaySplit split;
  std::map<std::int64_t, int> bucket;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const int b = i < counts[0] ? 0 : (i < counts[0] + counts[1] ? 1 : 2);
    bucket[days[i]] = b;
    (b == 0 ? split.train_days : b == 1 ? split.val_days : split.test_days).push_back(days[i]);
  }
  for (auto* v : {&split.train_days, &split.val_days, &split.test_days}) std::sort(v->begin(), v->end());
  for (const auto& f : flights) {
    if (f.points.empty()) continue;
    const int b = bucket[day_of(f.points.front().timestamp)];
    (b == 0 ? split.train : b == 1 ? split.val : split.test).push_back(f);
  }
  return split;
}

constraints::LabeledTrack to_labeled_track(const Flight& flight, phase::Phase phase) {
  constraints::LabeledTrack t;
  t.id = flight.id;
  t.phase = phase;
  for (const auto& p : flight.points) {
    t.time_s.push_back(p.timestamp);
    t.points.push_back(p.geo());
    t.heading_deg.push_back(p.heading_deg);
    t.bank_deg.push_back(p.bank_deg);
    t.speed_kt.push_back(p.gs_kt);
  }
  return t;
}

std::vector<constraints::LabeledTrack> phase_runs(const Flight& flight, std::size_t min_points) {
  if (flight.phases.size() != flight.points.size()) {
    throw DataError("phase_runs: flight '" + flight.id + "' carries no phase annotations");
  }
  std::vector<constraints::LabeledTrack> out;
  std::size_t i = 0;
  while (i < flight.points.size()) {
    std::size_t j = i;
    while (j < flight.points.size() && flight.phases[j] == flight.phases[i]) ++j;
    if (flight.phases[i] != phase::Phase::enroute && j - i >= min_points) {
      Flight run;
      run.id = flight.id;
      run.points.assign(flight.points.begin() + static_cast<std::ptrdiff_t>(i),
                        flight.points.begin() + static_cast<std::ptrdiff_t>(j));
      out.push_back(to_labeled_track(run, flight.phases[i]));
    }
    i = j;
  }
  return out;
}

void annotate_phases(Flight& flight, const phase::FuzzyParams& params) {
  if (flight.points.empty()) throw InvalidArgument("annotate_phases: flight '" + flight.id + "' has no points");
  std::vector<phase::PointKinematics> kin;
  kin.reserve(flight.points.size());
  flight.activation.clear();
  for (const auto& p : flight.points) {
    kin.push_back({p.alt_ft, p.gs_kt, p.vrate_fpm});
    flight.activation.push_back(phase::classify_point(p.alt_ft, p.gs_kt, p.vrate_fpm, params).activation);
  }
  const auto segments = phase::segment_flight(kin, params);
  flight.phases = phase::expand_segments(segments);
}

Flight flight_from_points(const std::string& id, const std::vector<GeoPoint>& points, double t0,
                          const std::string& actype) {
  if (points.size() < 2) throw InvalidArgument("flight_from_points: need at least 2 points");
  Flight f;
  f.id = id;
  f.actype = actype;
  double heading = kNaN;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GeoPoint& a = points[i == 0 ? 0 : i - 1];
    const GeoPoint& b = points[i == 0 ? 1 : i];
    if (a.lat != b.lat || a.lon != b.lon) heading = initial_bearing(a, b);
    TrackPoint p;
    p.timestamp = t0 + kStepSeconds * static_cast<double>(i);
    p.flight_id = id;
    p.lat = points[i].lat;
    p.lon = points[i].lon;
    p.alt_ft = units::m2ft(points[i].alt);
    p.gs_kt = units::mps2kt(haversine(a, b) / kStepSeconds);
    p.vrate_fpm = units::mps2fpm((b.alt - a.alt) / kStepSeconds);
    p.heading_deg = heading;
    p.actype = actype;
    f.points.push_back(std::move(p));
  }
  return f;
}

phase::Phase dominant_phase(const Flight& flight) {
  if (flight.phases.empty()) throw DataError("flight '" + flight.id + "' has no phase annotations");
  std::array<std::size_t, 3> counts{};
  for (auto p : flight.phases) ++counts[static_cast<std::size_t>(p)];
  return static_cast<phase::Phase>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace flightpred::data
