#include "flightpred/phase/fuzzy.hpp"

#include <algorithm>
#include <cmath>

#include "flightpred/error.hpp"

namespace flightpred::phase {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::takeoff:
      return "Takeoff";
    case Phase::enroute:
      return "EnRoute";
    case Phase::approach:
      return "Approach";
  }
  return "EnRoute";
}

Phase phase_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "takeoff") return Phase::takeoff;
  if (lower == "enroute" || lower == "en-route") return Phase::enroute;
  if (lower == "approach") return Phase::approach;
  throw InvalidArgument("unknown phase: " + std::string(s));
}

double gaussian_mf(double x, double mu, double sigma) {
  const double d = x - mu;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

double s_mf(double x, double a, double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double mid = 0.5 * (a + b);
  if (x <= mid) {
    const double u = (x - a) / (b - a);
    return 2.0 * u * u;
  }
  const double u = (x - b) / (b - a);
  return 1.0 - 2.0 * u * u;
}

double z_mf(double x, double a, double b) { return 1.0 - s_mf(x, a, b); }

double MembershipFunction::operator()(double x) const {
  switch (kind) {
    case Kind::gaussian:
      return gaussian_mf(x, p1, p2);
    case Kind::s_shaped:
      return s_mf(x, p1, p2);
    case Kind::z_shaped:
      return z_mf(x, p1, p2);
  }
  return 0.0;
}

void MembershipFunction::validate() const {
  if (kind == Kind::gaussian) {
    if (!(p2 > 0.0)) throw InvalidArgument("gaussian membership requires sigma > 0");
  } else if (!(p1 < p2)) {
    throw InvalidArgument("S/Z membership requires a < b");
  }
}

void FuzzyParams::validate() const {
  for (const auto* mf : {&h_lo, &h_hi, &v_mid, &v_hi, &roc_zero, &roc_plus, &roc_minus}) mf->validate();
}

PhaseLabel classify_point(double alt_ft, double speed_kt, double roc_fpm, const FuzzyParams& p) {
  const double h_lo = p.h_lo(alt_ft);
  const double h_hi = p.h_hi(alt_ft);
  const double v_mid = p.v_mid(speed_kt);
  const double v_hi = p.v_hi(speed_kt);
  const double roc0 = p.roc_zero(roc_fpm);
  const double roc_plus = p.roc_plus(roc_fpm);
  const double roc_minus = p.roc_minus(roc_fpm);

  PhaseLabel label;
  label.degrees[static_cast<int>(Phase::takeoff)] = std::min({h_lo, v_mid, roc_plus});
  label.degrees[static_cast<int>(Phase::enroute)] = std::min({h_hi, v_hi, roc0});
  label.degrees[static_cast<int>(Phase::approach)] = std::min({h_lo, v_mid, std::max(roc_minus, roc0)});

  // Strict comparison keeps the earlier phase on ties.
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (label.degrees[k] > label.degrees[best]) best = k;
  }
  label.phase = static_cast<Phase>(best);
  label.activation = label.degrees[best];
  return label;
}

std::vector<std::string> input_range_warnings(double alt_ft, double speed_kt, double roc_fpm) {
  std::vector<std::string> w;
  if (alt_ft < -2000.0 || alt_ft > 60000.0) w.emplace_back("altitude outside [-2000, 60000] ft; expected feet");
  if (speed_kt < 0.0 || speed_kt > 800.0) w.emplace_back("speed outside [0, 800] kt; expected knots");
  if (std::abs(roc_fpm) > 10000.0) w.emplace_back("vertical rate beyond 10000 ft/min; expected ft/min");
  return w;
}

namespace {

struct Run {
  Phase phase;
  std::size_t length;
};

void merge_equal_neighbours(std::vector<Run>& runs) {
  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && merged.back().phase == r.phase) {
      merged.back().length += r.length;
    } else {
      merged.push_back(r);
    }
  }
  runs = std::move(merged);
}

}  // namespace

std::vector<Segment> segment_labels(std::span<const Phase> labels, std::size_t min_run) {
  std::vector<Run> runs;
  for (Phase p : labels) {
    if (!runs.empty() && runs.back().phase == p) {
      ++runs.back().length;
    } else {
      runs.push_back({p, 1});
    }
  }

  while (runs.size() > 1) {
    std::size_t shortest = 0;
    for (std::size_t i = 1; i < runs.size(); ++i) {
      if (runs[i].length < runs[shortest].length) shortest = i;
    }
    if (runs[shortest].length >= min_run) break;
    std::size_t target;
    if (shortest == 0) {
      target = 1;
    } else if (shortest + 1 == runs.size()) {
      target = shortest - 1;
    } else {
      target = runs[shortest + 1].length > runs[shortest - 1].length ? shortest + 1 : shortest - 1;
    }
    runs[target].length += runs[shortest].length;
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(shortest));
    merge_equal_neighbours(runs);
  }

  std::vector<Segment> segments;
  std::size_t pos = 0;
  for (const Run& r : runs) {
    segments.push_back({r.phase, pos, pos + r.length});
    pos += r.length;
  }
  return segments;
}

std::vector<Segment> segment_flight(std::span<const PointKinematics> points, const FuzzyParams& params,
                                    std::size_t min_run) {
  if (points.empty()) throw InvalidArgument("segment_flight: empty input");
  std::vector<Phase> labels;
  labels.reserve(points.size());
  for (const auto& p : points) labels.push_back(classify_point(p.alt_ft, p.speed_kt, p.roc_fpm, params).phase);
  return segment_labels(labels, min_run);
}

std::vector<Phase> expand_segments(std::span<const Segment> segments) {
  std::vector<Phase> out;
  for (const auto& s : segments) out.insert(out.end(), s.end - s.start, s.phase);
  return out;
}

}  // namespace flightpred::phase
