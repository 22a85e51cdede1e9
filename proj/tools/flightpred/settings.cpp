#include "settings.hpp"

#include "flightpred/textio.hpp"

namespace flightpred::cli {

namespace {

const std::set<std::string> kCommands = {"phase",   "fit-constraints", "gen-synthetic", "train-terminal",
                                         "train-enroute", "predict", "evaluate", "export-geojson"};

}  // namespace

Section::Section(const nlohmann::json* j, std::string name) : j_(j), name_(std::move(name)) {
  if (j_ && !j_->is_object()) throw InvalidArgument("config section '" + name_ + "' must be an object");
}

void Section::finish() const {
  if (!j_) return;
  std::string unknown;
  for (const auto& [k, v] : j_->items()) {
    if (!seen_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) throw InvalidArgument("config section '" + name_ + "': unknown keys " + unknown);
}

ConfigFile ConfigFile::load(const std::string& path) {
  ConfigFile c;
  try {
    c.j_ = nlohmann::json::parse(textio::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config " + path + ": " + e.what());
  }
  if (!c.j_.is_object()) throw InvalidArgument("config " + path + ": top level must be an object");
  for (const auto& [k, v] : c.j_.items()) {
    if (k != "seed" && !kCommands.count(k)) throw InvalidArgument("config " + path + ": unknown section '" + k + "'");
  }
  return c;
}

std::optional<std::uint64_t> ConfigFile::seed() const {
  if (!j_.contains("seed")) return std::nullopt;
  if (!j_["seed"].is_number_unsigned()) throw InvalidArgument("config: seed must be a non-negative integer");
  return j_["seed"].get<std::uint64_t>();
}

const nlohmann::json* ConfigFile::section(const std::string& command) const {
  auto it = j_.find(command);
  return it == j_.end() ? nullptr : &*it;
}

void read_scenario_config(Section& s, data::ScenarioConfig& c) {
  s.get("n_arrivals", c.n_arrivals);
  s.get("n_departures", c.n_departures);
  s.get("steps", c.steps);
  s.get("runway_heading_deg", c.runway_heading_deg);
  s.get("noise_m", c.noise_m);
  s.get("alt_noise_m", c.alt_noise_m);
  s.get("glide_min_deg", c.glide_min_deg);
  s.get("glide_max_deg", c.glide_max_deg);
  s.get("yield", c.yield);
  s.get("climb_angle_deg", c.climb_angle_deg);
  s.get("climb_angle_min_deg", c.climb_angle_min_deg);
  s.get("turn_rate_deg_s", c.turn_rate_deg_s);
  s.get("turn_total_deg", c.turn_total_deg);
  s.get("actype", c.actype);
}

void read_enroute_scenario_config(Section& s, enroute::EnrouteScenarioConfig& c) {
  s.get("t_obs", c.t_obs);
  s.get("horizon", c.horizon);
  s.get("noise_m", c.noise_m);
  s.get("alt_noise_m", c.alt_noise_m);
  s.get("cell_probability", c.cell_probability);
  s.get("cell_radius_m", c.cell_radius_m);
  s.get("detour_gain", c.detour_gain);
  s.get("level_ft", c.level_ft);
}

void read_structural_config(Section& s, terminal::StructuralConfig& c) {
  s.get("hidden", c.hidden);
  s.get("embed", c.embed);
  s.get("attn_dim", c.attn_dim);
  s.get("attention", c.attention);
  s.get("scene_radius_m", c.scene_radius_m);
}

void read_structural_train_config(Section& s, terminal::StructuralTrainConfig& c) {
  s.get("epochs", c.epochs);
  s.get("lr", c.adam.lr);
  s.get("clip_norm", c.clip_norm);
  s.get("t_obs", c.t_obs);
  s.get("t_pred", c.t_pred);
}

void read_enroute_config(Section& s, enroute::EnrouteConfig& c) {
  s.get("hidden", c.hidden);
  s.get("attn_dim", c.attn_dim);
  s.get("weather_code", c.weather_code);
  s.get("plan_embed", c.plan_embed);
  s.get("conv_channels", c.conv_channels);
  s.get("window", c.window);
  s.get("t_obs", c.t_obs);
  s.get("use_weather", c.use_weather);
}

void read_enroute_train_config(Section& s, enroute::EnrouteTrainConfig& c, std::size_t& horizon) {
  s.get("epochs", c.epochs);
  s.get("batch_size", c.batch_size);
  s.get("lr", c.adam.lr);
  s.get("clip_norm", c.clip_norm);
  s.get("teacher_forcing", c.teacher_forcing);
  s.get("horizon", horizon);
  s.get("lva_velocity", c.lva.velocity);
  s.get("lva_angle", c.lva.angle);
  s.get("lva_position", c.lva.position);
}

}  // namespace flightpred::cli
