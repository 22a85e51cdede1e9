#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "settings.hpp"

namespace flightpred::cli {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  ConfigFile config;

  /// --seed, else the config file's seed, else 0.
  std::uint64_t resolved_seed() const;
};

struct PhaseOptions {
  std::string input;
};

struct FitConstraintsOptions {
  std::string input;
  std::string statistic = "max";
};

struct GenSyntheticOptions {
  std::string kind = "terminal";
  std::size_t count = 100;
};

struct TrainTerminalOptions {
  std::string train;
  std::string val;
};

struct TrainEnrouteOptions {
  std::string train;
  std::string val;
  std::string experiment_case;  // empty keeps the config's use_weather
};

struct PredictOptions {
  std::string model;
  std::string input;
  std::size_t t_obs = 18;
  std::size_t horizon = 30;
  std::string constraints;
  bool mean = false;
};

struct EvaluateOptions {
  std::string phase;
  std::string experiment_case;
  std::vector<std::string> models;
  std::string data;
  std::string constraints;
  std::optional<std::size_t> t_obs;
  std::optional<std::size_t> horizon;
  bool mean = false;
};

struct ExportGeojsonOptions {
  std::string input;
};

void run_phase(const Globals& g, const PhaseOptions& o);
void run_fit_constraints(const Globals& g, const FitConstraintsOptions& o);
void run_gen_synthetic(const Globals& g, const GenSyntheticOptions& o);
void run_train_terminal(const Globals& g, const TrainTerminalOptions& o);
void run_train_enroute(const Globals& g, const TrainEnrouteOptions& o);
void run_predict(const Globals& g, const PredictOptions& o);
void run_evaluate(const Globals& g, const EvaluateOptions& o);
void run_export_geojson(const Globals& g, const ExportGeojsonOptions& o);

}  // namespace flightpred::cli
