#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/data/tracks.hpp"
#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/eval/kalman.hpp"
#include "flightpred/eval/metrics.hpp"
#include "flightpred/terminal/scene.hpp"
#include "flightpred/terminal/structural.hpp"

namespace flightpred::eval {

/// One terminal-area evaluation window: a scene cut after t_obs frames and the
/// aircraft of the requested phase that are present throughout the window.
struct TerminalCase {
  terminal::Scene observed;
  std::vector<graph::NodeId> nodes;
  std::vector<std::vector<GeoPoint>> history;  // per node, t_obs points
  std::vector<std::vector<GeoPoint>> truth;    // per node, horizon points
};

/// Resamples, annotates unlabelled flights with the fuzzy classifier, groups
/// concurrent flights into scenes and keeps every scene long enough for the window.
std::vector<TerminalCase> terminal_cases(const std::vector<data::Flight>& flights, phase::Phase phase,
                                         std::size_t t_obs, std::size_t horizon);

/// Per-node predicted tracks, in TerminalCase::nodes order.
using TerminalPredictor = std::function<std::vector<std::vector<GeoPoint>>(const TerminalCase&)>;
using EnroutePredictor = std::function<std::vector<GeoPoint>(const enroute::EnrouteSample&)>;

/// Closed-loop rollouts; the predictor owns an Rng seeded with `seed` and
/// advances it across cases, so a fixed case order gives fixed output.
TerminalPredictor structural_predictor(const terminal::StructuralModel& model, std::size_t horizon, bool sample,
                                       std::optional<constraints::ConstraintSet> gate, std::uint64_t seed);
TerminalPredictor kalman_terminal_predictor(KalmanMode mode, std::size_t horizon);
EnroutePredictor dualattn_predictor(const enroute::DualAttnModel& model, std::size_t horizon);
EnroutePredictor kalman_enroute_predictor(KalmanMode mode, std::size_t horizon);

MetricsReport evaluate_terminal(const std::string& name, const std::vector<TerminalCase>& cases,
                                const TerminalPredictor& predict);
MetricsReport evaluate_enroute(const std::string& name, const std::vector<enroute::EnrouteSample>& samples,
                               const EnroutePredictor& predict);

enum class ExperimentCase { C1, C2 };
std::string_view to_string(ExperimentCase c);
ExperimentCase experiment_case_from_string(std::string_view s);

struct ExperimentConfig {
  phase::Phase phase = phase::Phase::approach;
  /// En-route only: C1 models ignore weather, C2 models use it.
  ExperimentCase experiment_case = ExperimentCase::C2;
  std::size_t t_obs = 18;
  std::size_t horizon = 30;
  std::uint64_t seed = 0;
  std::vector<std::string> model_paths;
  /// Track CSV for takeoff/approach, dataset directory for en-route.
  std::string data_path;
  /// Optional; each terminal model is also rolled out through the gate.
  std::string constraints_path;
  /// Terminal rollouts draw from the predicted distribution; false follows the mean.
  bool sample = true;
  void validate() const;
};

/// Keys: phase, case, t_obs, horizon, seed, models, data, constraints, sample.
/// Unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct ExperimentResult {
  std::vector<MetricsReport> reports;  // models in config order, then the baseline
  std::size_t cases = 0;
  std::vector<std::string> notes;
};

/// Loads the split, filters by phase, rolls out every model and the Kalman
/// baseline (linear acceleration for takeoff/approach, constant speed en
/// route). Missing inputs are collected and reported in one IoError.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// report.txt (aligned table) and report.csv under `dir`.
void write_experiment_reports(const std::string& dir, const ExperimentResult& result);

}  // namespace flightpred::eval
