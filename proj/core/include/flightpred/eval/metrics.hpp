#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "flightpred/constraints/geo.hpp"

namespace flightpred::eval {

/// Mean 3-D distance over steps (haversine horizontal, altitude delta combined Euclidean-style).
double ade(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth);
/// 3-D distance at the final step only.
double fde(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth);

struct MaeComponents {
  double lat = 0.0;  // deg
  double lon = 0.0;  // deg
  double alt = 0.0;  // m
};
MaeComponents mae_components(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth);

struct MetricsReport {
  std::string model;
  double ade = 0.0;
  double fde = 0.0;
  double mae_lat = 0.0;
  double mae_lon = 0.0;
  double mae_alt = 0.0;
  std::size_t n_trajectories = 0;
  std::size_t horizon = 0;
};

/// Averages per-trajectory metrics in insertion order.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::string model) : model_(std::move(model)) {}
  void add(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth);
  MetricsReport report() const;

 private:
  std::string model_;
  double ade_ = 0.0, fde_ = 0.0, lat_ = 0.0, lon_ = 0.0, alt_ = 0.0;
  std::size_t n_ = 0;
  std::size_t horizon_ = 0;
};

/// Aligned text table, one row per report.
void write_report_text(std::ostream& os, const std::vector<MetricsReport>& reports);
/// model,ade_m,fde_m,mae_lat_deg,mae_lon_deg,mae_alt_m,n_trajectories,horizon
void write_report_csv(std::ostream& os, const std::vector<MetricsReport>& reports);

}  // namespace flightpred::eval
