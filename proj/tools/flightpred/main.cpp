#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"

using namespace flightpred;
using namespace flightpred::cli;

namespace {

int fail(ErrorKind kind, const std::string& msg) {
  std::cerr << "error [" << to_string(kind) << "]: " << msg << '\n';
  return static_cast<int>(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-aware flight trajectory prediction"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_version_flag("--version", "flightpred 0.1.0");

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON config with one section per subcommand")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed for generation, training and sampling");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  PhaseOptions phase_o;
  auto* phase = app.add_subcommand("phase", "Label track points with flight phases");
  phase->add_option("--input,-i", phase_o.input, "Track CSV")->required();

  FitConstraintsOptions fit_o;
  auto* fit = app.add_subcommand("fit-constraints", "Fit climb/descend angle and turn-rate limits");
  fit->add_option("--input,-i", fit_o.input, "Track CSV")->required();
  fit->add_option("--statistic", fit_o.statistic, "max or p995")->capture_default_str();

  GenSyntheticOptions gen_o;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate synthetic terminal or en-route data");
  gen->add_option("--kind", gen_o.kind, "terminal or enroute")->capture_default_str();
  gen->add_option("--count,-n", gen_o.count, "Scenes (terminal) or flights (enroute)")->capture_default_str();

  TrainTerminalOptions tt_o;
  auto* tt = app.add_subcommand("train-terminal", "Train the structural st-graph model");
  tt->add_option("--train", tt_o.train, "Training track CSV")->required();
  tt->add_option("--val", tt_o.val, "Validation track CSV");

  TrainEnrouteOptions te_o;
  auto* te = app.add_subcommand("train-enroute", "Train the dual-attention en-route model");
  te->add_option("--train", te_o.train, "Training dataset directory")->required();
  te->add_option("--val", te_o.val, "Validation dataset directory");
  te->add_option("--case", te_o.experiment_case, "C1 (no weather) or C2 (weather)");

  PredictOptions pr_o;
  auto* pr = app.add_subcommand("predict", "Roll a trained model out over observed data");
  pr->add_option("--model,-m", pr_o.model, "Checkpoint")->required();
  pr->add_option("--input,-i", pr_o.input, "Track CSV (terminal) or dataset directory (en-route)")->required();
  pr->add_option("--t-obs", pr_o.t_obs, "Observed frames per scene (terminal)")->capture_default_str();
  pr->add_option("--horizon", pr_o.horizon, "Predicted steps")->capture_default_str();
  pr->add_option("--constraints", pr_o.constraints, "Constraint file gating terminal rollouts");
  pr->add_flag("--mean", pr_o.mean, "Follow the predicted mean instead of sampling");

  EvaluateOptions ev_o;
  auto* ev = app.add_subcommand("evaluate", "Score models and the Kalman baseline");
  ev->add_option("--phase", ev_o.phase, "takeoff, enroute or approach");
  ev->add_option("--case", ev_o.experiment_case, "C1 or C2 (en-route)");
  ev->add_option("--model,-m", ev_o.models, "Checkpoint (repeatable)");
  ev->add_option("--data", ev_o.data, "Track CSV or en-route dataset directory");
  ev->add_option("--constraints", ev_o.constraints, "Also score each terminal model through this gate");
  std::size_t ev_t_obs = 0, ev_horizon = 0;
  auto* ev_t_obs_opt = ev->add_option("--t-obs", ev_t_obs, "Observed frames");
  auto* ev_horizon_opt = ev->add_option("--horizon", ev_horizon, "Predicted steps");
  ev->add_flag("--mean", ev_o.mean, "Follow the predicted mean instead of sampling");

  ExportGeojsonOptions gj_o;
  auto* gj = app.add_subcommand("export-geojson", "Convert a track or predictions CSV to GeoJSON LineStrings");
  gj->add_option("--input,-i", gj_o.input, "Track or predictions CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::invalid_argument);
  }

  try {
    if (*seed_opt) g.seed = seed;
    if (!g.config_path.empty()) g.config = ConfigFile::load(g.config_path);
    if (*ev_t_obs_opt) ev_o.t_obs = ev_t_obs;
    if (*ev_horizon_opt) ev_o.horizon = ev_horizon;

    if (*phase) run_phase(g, phase_o);
    else if (*fit) run_fit_constraints(g, fit_o);
    else if (*gen) run_gen_synthetic(g, gen_o);
    else if (*tt) run_train_terminal(g, tt_o);
    else if (*te) run_train_enroute(g, te_o);
    else if (*pr) run_predict(g, pr_o);
    else if (*ev) run_evaluate(g, ev_o);
    else if (*gj) run_export_geojson(g, gj_o);
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ErrorKind::io, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorKind::data, e.what());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
