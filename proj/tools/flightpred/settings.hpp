#pragma once

#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "flightpred/data/synthetic.hpp"
#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/enroute/synthetic.hpp"
#include "flightpred/error.hpp"
#include "flightpred/terminal/structural.hpp"

namespace flightpred::cli {

/// Reads keys out of one JSON object and complains about the ones left over.
class Section {
 public:
  Section(const nlohmann::json* j, std::string name);

  template <class T>
  void get(const std::string& key, T& out) {
    if (!j_ || !j_->contains(key)) return;
    seen_.insert(key);
    try {
      out = j_->at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument(name_ + "." + key + ": " + e.what());
    }
  }
  const nlohmann::json* raw() const { return j_; }
  void finish() const;

 private:
  const nlohmann::json* j_;
  std::string name_;
  std::set<std::string> seen_;
};

/// The --config file: an object with an optional top-level "seed" and one
/// object per subcommand name.
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path);
  ConfigFile() = default;

  std::optional<std::uint64_t> seed() const;
  /// Null when the file has no section for `command`.
  const nlohmann::json* section(const std::string& command) const;

 private:
  nlohmann::json j_ = nlohmann::json::object();
};

void read_scenario_config(Section& s, data::ScenarioConfig& c);
void read_enroute_scenario_config(Section& s, enroute::EnrouteScenarioConfig& c);
void read_structural_config(Section& s, terminal::StructuralConfig& c);
void read_structural_train_config(Section& s, terminal::StructuralTrainConfig& c);
void read_enroute_config(Section& s, enroute::EnrouteConfig& c);
void read_enroute_train_config(Section& s, enroute::EnrouteTrainConfig& c, std::size_t& horizon);

}  // namespace flightpred::cli
