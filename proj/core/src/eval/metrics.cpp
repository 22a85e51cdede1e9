#include "flightpred/eval/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "flightpred/error.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::eval {

namespace {

void check_lengths(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth, const char* what) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw InvalidArgument(std::string(what) + ": empty trajectory");
}

}  // namespace

double ade(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth) {
  check_lengths(pred, truth, "ade");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += distance_3d(pred[i], truth[i]);
  return s / static_cast<double>(pred.size());
}

double fde(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth) {
  check_lengths(pred, truth, "fde");
  return distance_3d(pred.back(), truth.back());
}

MaeComponents mae_components(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth) {
  check_lengths(pred, truth, "mae");
  MaeComponents m;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    m.lat += std::abs(pred[i].lat - truth[i].lat);
    m.lon += std::abs(wrap_angle_deg(pred[i].lon - truth[i].lon));
    m.alt += std::abs(pred[i].alt - truth[i].alt);
  }
  const auto n = static_cast<double>(pred.size());
  m.lat /= n;
  m.lon /= n;
  m.alt /= n;
  return m;
}

void MetricsAccumulator::add(const std::vector<GeoPoint>& pred, const std::vector<GeoPoint>& truth) {
  ade_ += ade(pred, truth);
  fde_ += fde(pred, truth);
  const auto m = mae_components(pred, truth);
  lat_ += m.lat;
  lon_ += m.lon;
  alt_ += m.alt;
  horizon_ = std::max(horizon_, pred.size());
  ++n_;
}

MetricsReport MetricsAccumulator::report() const {
  MetricsReport r;
  r.model = model_;
  r.n_trajectories = n_;
  r.horizon = horizon_;
  if (n_ == 0) return r;
  const auto n = static_cast<double>(n_);
  r.ade = ade_ / n;
  r.fde = fde_ / n;
  r.mae_lat = lat_ / n;
  r.mae_lon = lon_ / n;
  r.mae_alt = alt_ / n;
  return r;
}

void write_report_text(std::ostream& os, const std::vector<MetricsReport>& reports) {
  std::size_t w = 5;
  for (const auto& r : reports) w = std::max(w, r.model.size());
  os << std::left << std::setw(static_cast<int>(w)) << "model" << std::right << std::setw(12) << "ADE(m)"
     << std::setw(12) << "FDE(m)" << std::setw(12) << "MAE lat" << std::setw(12) << "MAE lon" << std::setw(12)
     << "MAE alt(m)" << std::setw(8) << "n" << std::setw(9) << "horizon" << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(static_cast<int>(w)) << r.model << std::right << std::fixed << std::setprecision(2)
       << std::setw(12) << r.ade << std::setw(12) << r.fde << std::setprecision(6) << std::setw(12) << r.mae_lat
       << std::setw(12) << r.mae_lon << std::setprecision(2) << std::setw(12) << r.mae_alt << std::setw(8)
       << r.n_trajectories << std::setw(9) << r.horizon << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

void write_report_csv(std::ostream& os, const std::vector<MetricsReport>& reports) {
  os << "model,ade_m,fde_m,mae_lat_deg,mae_lon_deg,mae_alt_m,n_trajectories,horizon\n";
  for (const auto& r : reports) {
    os << r.model << ',' << textio::format_double(r.ade) << ',' << textio::format_double(r.fde) << ','
       << textio::format_double(r.mae_lat) << ',' << textio::format_double(r.mae_lon) << ','
       << textio::format_double(r.mae_alt) << ',' << r.n_trajectories << ',' << r.horizon << '\n';
  }
}

}  // namespace flightpred::eval
