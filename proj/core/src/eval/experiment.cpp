#include "flightpred/eval/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flightpred/enroute/dataset.hpp"
#include "flightpred/error.hpp"
#include "flightpred/nn/checkpoint.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::eval {

namespace fs = std::filesystem;

std::vector<TerminalCase> terminal_cases(const std::vector<data::Flight>& flights, phase::Phase phase,
                                         std::size_t t_obs, std::size_t horizon) {
  if (t_obs < 3 || horizon < 1) throw InvalidArgument("terminal cases: need t_obs >= 3 and horizon >= 1");
  std::vector<data::Flight> gridded;
  for (const auto& f : flights) {
    if (f.points.size() < 2) continue;
    for (auto& piece : data::resample_10s(f)) {
      if (piece.phases.size() != piece.points.size()) data::annotate_phases(piece);
      gridded.push_back(std::move(piece));
    }
  }
  const std::size_t frames = t_obs + horizon;
  std::vector<TerminalCase> out;
  for (const auto& group : terminal::group_concurrent(gridded)) {
    const terminal::Scene scene = terminal::build_scene(group);
    if (scene.graph.frame_count() < frames) continue;
    TerminalCase c;
    for (const auto& [id, ph] : scene.phases) {
      if (ph != phase) continue;
      std::vector<GeoPoint> track;
      for (std::size_t t = 0; t < frames; ++t) {
        const graph::NodeState* n = scene.graph.find(t, id);
        if (!n) break;
        track.push_back(n->pos);
      }
      if (track.size() != frames) continue;
      c.nodes.push_back(id);
      c.history.emplace_back(track.begin(), track.begin() + static_cast<std::ptrdiff_t>(t_obs));
      c.truth.emplace_back(track.begin() + static_cast<std::ptrdiff_t>(t_obs), track.end());
    }
    if (c.nodes.empty()) continue;
    c.observed = terminal::truncate_scene(scene, t_obs);
    out.push_back(std::move(c));
  }
  return out;
}

TerminalPredictor structural_predictor(const terminal::StructuralModel& model, std::size_t horizon, bool sample,
                                       std::optional<constraints::ConstraintSet> gate, std::uint64_t seed) {
  auto rng = std::make_shared<nn::Rng>(seed);
  terminal::RolloutOptions opts;
  opts.horizon = horizon;
  opts.sample = sample;
  opts.constraints = std::move(gate);
  return [&model, rng, opts](const TerminalCase& c) {
    const auto pred = terminal::rollout(model, c.observed, opts, *rng);
    std::vector<std::vector<GeoPoint>> out;
    for (auto id : c.nodes) {
      auto it = pred.nodes.find(id);
      if (it == pred.nodes.end()) throw DataError("rollout produced no track for node " + std::to_string(id));
      std::vector<GeoPoint> track;
      for (const auto& s : it->second) track.push_back(s.point);
      out.push_back(std::move(track));
    }
    return out;
  };
}

TerminalPredictor kalman_terminal_predictor(KalmanMode mode, std::size_t horizon) {
  return [mode, horizon](const TerminalCase& c) {
    std::vector<std::vector<GeoPoint>> out;
    for (const auto& h : c.history) out.push_back(kalman_baseline(h, horizon, mode));
    return out;
  };
}

EnroutePredictor dualattn_predictor(const enroute::DualAttnModel& model, std::size_t horizon) {
  return [&model, horizon](const enroute::EnrouteSample& s) { return enroute::predict_enroute(model, s, horizon); };
}

EnroutePredictor kalman_enroute_predictor(KalmanMode mode, std::size_t horizon) {
  return [mode, horizon](const enroute::EnrouteSample& s) { return kalman_baseline(s.observed, horizon, mode); };
}

MetricsReport evaluate_terminal(const std::string& name, const std::vector<TerminalCase>& cases,
                                const TerminalPredictor& predict) {
  MetricsAccumulator acc(name);
  for (const auto& c : cases) {
    const auto pred = predict(c);
    if (pred.size() != c.nodes.size()) throw DataError(name + ": predictor returned the wrong number of tracks");
    for (std::size_t i = 0; i < pred.size(); ++i) acc.add(pred[i], c.truth[i]);
  }
  return acc.report();
}

MetricsReport evaluate_enroute(const std::string& name, const std::vector<enroute::EnrouteSample>& samples,
                               const EnroutePredictor& predict) {
  MetricsAccumulator acc(name);
  for (const auto& s : samples) acc.add(predict(s), s.target);
  return acc.report();
}

std::string_view to_string(ExperimentCase c) { return c == ExperimentCase::C1 ? "C1" : "C2"; }

ExperimentCase experiment_case_from_string(std::string_view s) {
  if (s == "C1" || s == "c1") return ExperimentCase::C1;
  if (s == "C2" || s == "c2") return ExperimentCase::C2;
  throw InvalidArgument("unknown experiment case '" + std::string(s) + "' (expected C1 or C2)");
}

void ExperimentConfig::validate() const {
  if (t_obs < 3) throw InvalidArgument("experiment: t_obs must be >= 3");
  if (horizon < 1) throw InvalidArgument("experiment: horizon must be >= 1");
  if (data_path.empty()) throw InvalidArgument("experiment: no data path");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("experiment config must be a JSON object");
  static const std::set<std::string> known = {"phase", "case", "t_obs", "horizon", "seed",
                                              "models", "data", "constraints", "sample"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw InvalidArgument("experiment config: unknown key '" + k + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("phase")) c.phase = phase::phase_from_string(j.at("phase").get<std::string>());
    if (j.contains("case")) c.experiment_case = experiment_case_from_string(j.at("case").get<std::string>());
    if (j.contains("t_obs")) c.t_obs = j.at("t_obs").get<std::size_t>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("models")) c.model_paths = j.at("models").get<std::vector<std::string>>();
    if (j.contains("data")) c.data_path = j.at("data").get<std::string>();
    if (j.contains("constraints")) c.constraints_path = j.at("constraints").get<std::string>();
    if (j.contains("sample")) c.sample = j.at("sample").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
  return c;
}

namespace {

// File stems, prefixed with the parent directory where two stems collide.
std::vector<std::string> model_names(const std::vector<std::string>& paths) {
  std::map<std::string, int> seen;
  for (const auto& p : paths) ++seen[fs::path(p).stem().string()];
  std::vector<std::string> out;
  for (const auto& p : paths) {
    const fs::path path(p);
    std::string name = path.stem().string();
    if (seen[name] > 1) name = fs::absolute(path).parent_path().filename().string() + "/" + name;
    out.push_back(name);
  }
  return out;
}

void require_inputs(const ExperimentConfig& cfg) {
  std::vector<std::string> missing;
  if (!fs::exists(cfg.data_path)) missing.push_back("data " + cfg.data_path);
  for (const auto& m : cfg.model_paths)
    if (!fs::exists(m)) missing.push_back("model " + m);
  if (!cfg.constraints_path.empty() && !fs::exists(cfg.constraints_path)) {
    missing.push_back("constraints " + cfg.constraints_path);
  }
  if (missing.empty()) return;
  std::string msg = "experiment inputs not found:";
  for (const auto& m : missing) msg += "\n  " + m;
  throw IoError(msg);
}

std::vector<nn::Checkpoint> load_checkpoints(const ExperimentConfig& cfg, const std::string& want_tag) {
  std::vector<nn::Checkpoint> out;
  std::vector<std::string> wrong;
  for (const auto& p : cfg.model_paths) {
    out.push_back(nn::decode_checkpoint(textio::read_file(p)));
    auto it = out.back().meta.tags.find("model");
    const std::string tag = it == out.back().meta.tags.end() ? "?" : it->second;
    if (tag != want_tag) wrong.push_back(p + " holds '" + tag + "'");
  }
  if (!wrong.empty()) {
    std::string msg = "phase " + std::string(phase::to_string(cfg.phase)) + " needs '" + want_tag + "' checkpoints:";
    for (const auto& w : wrong) msg += "\n  " + w;
    throw DataError(msg);
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  require_inputs(cfg);
  ExperimentResult res;

  if (cfg.phase == phase::Phase::enroute) {
    const auto cks = load_checkpoints(cfg, "dualattn");
    std::vector<enroute::DualAttnModel> models;
    for (const auto& ck : cks) models.push_back(enroute::DualAttnModel::from_checkpoint(ck));
    std::vector<std::string> mismatched;
    const bool want_weather = cfg.experiment_case == ExperimentCase::C2;
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].config().use_weather != want_weather) mismatched.push_back(cfg.model_paths[i]);
      if (models[i].config().t_obs != cfg.t_obs) mismatched.push_back(cfg.model_paths[i] + " (t_obs)");
      if (models[i].config().window != models.front().config().window) {
        mismatched.push_back(cfg.model_paths[i] + " (weather window)");
      }
    }
    if (!mismatched.empty()) {
      std::string msg = "models do not match case " + std::string(to_string(cfg.experiment_case)) + ":";
      for (const auto& m : mismatched) msg += "\n  " + m;
      throw DataError(msg);
    }
    const std::size_t window = models.empty() ? 16 : models.front().config().window;
    const auto ds = enroute::load_enroute_dataset(cfg.data_path, cfg.t_obs, cfg.horizon, window);
    if (ds.samples.empty()) throw DataError("no en-route flight covers t_obs + horizon points");
    res.cases = ds.samples.size();
    for (const auto& id : ds.skipped) res.notes.push_back("skipped short flight " + id);
    const auto names = model_names(cfg.model_paths);
    for (std::size_t i = 0; i < models.size(); ++i) {
      res.reports.push_back(
          evaluate_enroute(names[i], ds.samples, dualattn_predictor(models[i], cfg.horizon)));
    }
    res.reports.push_back(evaluate_enroute("kalman_constant_speed", ds.samples,
                                           kalman_enroute_predictor(KalmanMode::constant_speed, cfg.horizon)));
    return res;
  }

  const auto cks = load_checkpoints(cfg, "structural");
  std::vector<terminal::StructuralModel> models;
  for (const auto& ck : cks) models.push_back(terminal::StructuralModel::from_checkpoint(ck));
  std::optional<constraints::ConstraintSet> gate;
  if (!cfg.constraints_path.empty()) gate = constraints::load_constraint_set(cfg.constraints_path);

  const auto parsed = data::parse_tracks_file(cfg.data_path);
  if (parsed.report.malformed) {
    res.notes.push_back("skipped " + std::to_string(parsed.report.malformed) + " malformed rows");
  }
  const auto cases = terminal_cases(parsed.flights, cfg.phase, cfg.t_obs, cfg.horizon);
  if (cases.empty()) throw DataError("no scene holds a " + std::string(phase::to_string(cfg.phase)) +
                                     " flight over t_obs + horizon frames");
  for (const auto& c : cases) res.cases += c.nodes.size();
  const auto names = model_names(cfg.model_paths);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string& name = names[i];
    res.reports.push_back(
        evaluate_terminal(name, cases, structural_predictor(models[i], cfg.horizon, cfg.sample, std::nullopt, cfg.seed)));
    if (gate) {
      res.reports.push_back(evaluate_terminal(name + "+constraints", cases,
                                              structural_predictor(models[i], cfg.horizon, cfg.sample, gate, cfg.seed)));
    }
  }
  res.reports.push_back(
      evaluate_terminal("kalman_linear_accel", cases, kalman_terminal_predictor(KalmanMode::linear_accel, cfg.horizon)));
  return res;
}

void write_experiment_reports(const std::string& dir, const ExperimentResult& result) {
  std::ostringstream txt, csv;
  write_report_text(txt, result.reports);
  write_report_csv(csv, result.reports);
  textio::write_file((fs::path(dir) / "report.txt").string(), txt.str());
  textio::write_file((fs::path(dir) / "report.csv").string(), csv.str());
}

}  // namespace flightpred::eval
