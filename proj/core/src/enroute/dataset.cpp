#include "flightpred/enroute/dataset.hpp"

#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flightpred/data/plans.hpp"
#include "flightpred/data/tracks.hpp"
#include "flightpred/error.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::enroute {

namespace fs = std::filesystem;

namespace {

std::string weather_path(const std::string& dir, const std::string& id) {
  return (fs::path(dir) / "weather" / (id + ".wxg1")).string();
}

}  // namespace

void save_enroute_dataset(const std::string& dir, const std::vector<EnrouteScenario>& scenarios, double t0) {
  std::vector<data::Flight> flights;
  std::ostringstream wp;
  wp << "id,lat,lon\n";
  nlohmann::json plans = nlohmann::json::object();
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& sc = scenarios[k];
    flights.push_back(data::flight_from_points(sc.flight_id, sc.track, t0 + 3600.0 * static_cast<double>(k)));
    if (sc.plan.real) {
      auto& ids = plans[sc.flight_id] = nlohmann::json::array();
      for (std::size_t i = 0; i < data::kPlanLength; ++i) {
        const std::string id = sc.flight_id + "-WP" + std::to_string(i);
        wp << id << ',' << textio::format_double(sc.plan.waypoints[i].lat) << ','
           << textio::format_double(sc.plan.waypoints[i].lon) << '\n';
        ids.push_back(id);
      }
    }
    save_wxg1(weather_path(dir, sc.flight_id), sc.field);
  }
  data::write_tracks_file((fs::path(dir) / "tracks.csv").string(), flights);
  textio::write_file((fs::path(dir) / "waypoints.csv").string(), wp.str());
  textio::write_file((fs::path(dir) / "plans.json").string(), plans.dump(2) + "\n");
}

EnrouteDataset load_enroute_dataset(const std::string& dir, std::size_t t_obs, std::size_t horizon,
                                    std::size_t window) {
  if (t_obs < 2) throw InvalidArgument("en-route dataset: need t_obs >= 2");
  std::vector<std::string> missing;
  const auto tracks_path = (fs::path(dir) / "tracks.csv").string();
  const auto wp_path = (fs::path(dir) / "waypoints.csv").string();
  const auto plans_path = (fs::path(dir) / "plans.json").string();
  for (const auto& p : {tracks_path, wp_path, plans_path})
    if (!fs::exists(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string msg = "en-route dataset is missing:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  const auto parsed = data::parse_tracks_file(tracks_path);
  const auto table = data::load_waypoint_table(wp_path);
  const auto book = data::load_plan_book(plans_path);

  EnrouteDataset out;
  std::vector<std::string> problems;
  for (const auto& flight : parsed.flights) {
    const std::string wx = weather_path(dir, flight.id);
    if (!fs::exists(wx)) {
      problems.push_back("no weather file " + wx);
      continue;
    }
    std::optional<std::vector<std::string>> ids;
    if (auto it = book.find(flight.id); it != book.end()) ids = it->second;
    data::FlightPlan plan;
    try {
      plan = data::plan_to_waypoints(ids, table, flight.id);
    } catch (const DataError& e) {
      problems.push_back(e.what());
      continue;
    }
    if (flight.points.size() < 2) {
      out.skipped.push_back(flight.id);
      continue;
    }
    const auto pieces = data::resample_10s(flight);
    if (pieces.empty() || pieces.front().points.size() < t_obs + horizon) {
      out.skipped.push_back(flight.id);
      continue;
    }
    const auto pts = pieces.front().geo_points();
    const WeatherGrid field = load_wxg1(wx);
    EnrouteSample s;
    s.flight_id = flight.id;
    s.plan = plan;
    s.observed.assign(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(t_obs));
    s.target.assign(pts.begin() + static_cast<std::ptrdiff_t>(t_obs),
                    pts.begin() + static_cast<std::ptrdiff_t>(t_obs + horizon));
    for (const auto& p : s.observed) s.weather.push_back(extract_window(field, p, window));
    out.samples.push_back(std::move(s));
  }
  if (!problems.empty()) {
    std::string msg = "en-route dataset " + dir + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  return out;
}

}  // namespace flightpred::enroute
