#include "commands.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/data/tracks.hpp"
#include "flightpred/enroute/dataset.hpp"
#include "flightpred/eval/experiment.hpp"
#include "flightpred/nn/checkpoint.hpp"
#include "flightpred/terminal/scene.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::cli {

namespace fs = std::filesystem;

namespace {

std::string out_path(const Globals& g, const std::string& name) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory " + g.out + ": " + ec.message());
  return (fs::path(g.out) / name).string();
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw InvalidArgument(what + " path is required");
  if (!fs::exists(path)) throw IoError(what + " not found: " + path);
}

std::vector<data::Flight> load_flights(const std::string& path) {
  require_file(path, "track file");
  auto parsed = data::parse_tracks_file(path);
  if (parsed.report.malformed) {
    std::cerr << "warning: skipped " << parsed.report.malformed << " malformed rows in " << path << '\n';
    for (const auto& m : parsed.report.messages) std::cerr << "  " << m << '\n';
  }
  if (parsed.flights.empty()) throw DataError("no flights in " + path);
  return std::move(parsed.flights);
}

// Resampled, annotated flights grouped into scenes.
std::vector<terminal::Scene> load_scenes(const std::string& path, double radius_m) {
  std::vector<data::Flight> gridded;
  for (const auto& f : load_flights(path)) {
    if (f.points.size() < 2) continue;
    for (auto& piece : data::resample_10s(f)) {
      if (piece.phases.size() != piece.points.size()) data::annotate_phases(piece);
      gridded.push_back(std::move(piece));
    }
  }
  std::vector<terminal::Scene> scenes;
  for (const auto& group : terminal::group_concurrent(gridded)) scenes.push_back(terminal::build_scene(group, radius_m));
  return scenes;
}

std::string checkpoint_kind(const std::string& path) {
  require_file(path, "model");
  const auto ck = nn::load_checkpoint(path);
  auto it = ck.meta.tags.find("model");
  if (it == ck.meta.tags.end()) throw DataError(path + " does not name its model kind");
  return it->second;
}

void write_curve(const std::string& path, const std::vector<double>& train, const std::vector<double>& val) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < train.size(); ++e) {
    os << e + 1 << ',' << textio::format_double(train[e]) << ','
       << (e < val.size() ? textio::format_double(val[e]) : "nan") << '\n';
  }
  textio::write_file(path, os.str());
}

}  // namespace

std::uint64_t Globals::resolved_seed() const {
  if (seed) return *seed;
  return config.seed().value_or(0);
}

void run_phase(const Globals& g, const PhaseOptions& o) {
  Section s(g.config.section("phase"), "phase");
  s.finish();
  auto flights = load_flights(o.input);
  std::map<phase::Phase, std::size_t> counts;
  for (auto& f : flights) {
    data::annotate_phases(f);
    for (auto p : f.phases) ++counts[p];
  }
  const std::string path = out_path(g, "phases.csv");
  data::write_tracks_file(path, flights);
  std::cout << "labelled " << flights.size() << " flights:";
  for (const auto& [p, n] : counts) std::cout << ' ' << phase::to_string(p) << '=' << n;
  std::cout << "\nwrote " << path << '\n';
}

void run_fit_constraints(const Globals& g, const FitConstraintsOptions& o) {
  Section s(g.config.section("fit-constraints"), "fit-constraints");
  std::string statistic = o.statistic;
  s.get("statistic", statistic);
  s.finish();
  constraints::FitStatistic stat;
  if (statistic == "max") {
    stat = constraints::FitStatistic::max;
  } else if (statistic == "p995") {
    stat = constraints::FitStatistic::p995;
  } else {
    throw InvalidArgument("--statistic must be max or p995");
  }
  std::vector<constraints::LabeledTrack> tracks;
  for (auto& f : load_flights(o.input)) {
    if (f.phases.size() != f.points.size()) data::annotate_phases(f);
    for (auto& t : data::phase_runs(f)) tracks.push_back(std::move(t));
  }
  const auto angles = constraints::fit_climb_descend(tracks);
  const auto rot = constraints::fit_rot(tracks);
  const auto cs = constraints::make_constraint_set(angles, rot, stat, fs::path(o.input).filename().string());
  const std::string path = out_path(g, "constraints.txt");
  constraints::save_constraint_set(path, cs);
  std::cout << "theta_c " << textio::format_fixed(cs.theta_c, 3) << " deg, theta_d "
            << textio::format_fixed(cs.theta_d, 3) << " deg, omega_rot " << textio::format_fixed(cs.omega_rot, 3)
            << " deg/s from " << tracks.size() << " phase runs\nwrote " << path << '\n';
}

void run_gen_synthetic(const Globals& g, const GenSyntheticOptions& o) {
  Section s(g.config.section("gen-synthetic"), "gen-synthetic");
  std::string kind = o.kind;
  std::size_t count = o.count;
  s.get("kind", kind);
  s.get("count", count);
  if (count == 0) throw InvalidArgument("--count must be positive");
  if (kind == "terminal") {
    data::ScenarioConfig cfg;
    read_scenario_config(s, cfg);
    s.finish();
    cfg.seed = g.resolved_seed();
    std::vector<data::Flight> flights;
    for (auto& sc : data::gen_synthetic_scenarios(cfg, count))
      for (auto& f : sc.flights) flights.push_back(std::move(f));
    const std::string path = out_path(g, "tracks.csv");
    data::write_tracks_file(path, flights);
    std::cout << "wrote " << flights.size() << " flights in " << count << " scenes to " << path << '\n';
  } else if (kind == "enroute") {
    enroute::EnrouteScenarioConfig cfg;
    read_enroute_scenario_config(s, cfg);
    s.finish();
    cfg.seed = g.resolved_seed();
    cfg.count = count;
    out_path(g, "");
    enroute::save_enroute_dataset(g.out, enroute::gen_enroute_scenarios(cfg));
    std::cout << "wrote " << count << " en-route flights to " << g.out << '\n';
  } else {
    throw InvalidArgument("--kind must be terminal or enroute");
  }
}

void run_train_terminal(const Globals& g, const TrainTerminalOptions& o) {
  Section s(g.config.section("train-terminal"), "train-terminal");
  terminal::StructuralConfig mc;
  terminal::StructuralTrainConfig tc;
  read_structural_config(s, mc);
  read_structural_train_config(s, tc);
  s.finish();
  mc.validate();
  tc.seed = g.resolved_seed();

  auto graphs_of = [&](const std::string& path) {
    std::vector<graph::STGraph> out;
    std::size_t short_scenes = 0;
    for (auto& sc : load_scenes(path, mc.scene_radius_m)) {
      if (sc.graph.frame_count() >= tc.t_pred) {
        out.push_back(std::move(sc.graph));
      } else {
        ++short_scenes;
      }
    }
    if (short_scenes) std::cerr << "note: " << short_scenes << " scenes in " << path << " shorter than t_pred\n";
    if (out.empty()) throw DataError("no scene in " + path + " spans t_pred = " + std::to_string(tc.t_pred) + " frames");
    return out;
  };
  const auto train = graphs_of(o.train);
  const auto val = o.val.empty() ? std::vector<graph::STGraph>{} : graphs_of(o.val);

  terminal::StructuralModel model(mc, terminal::fit_normalizer(train), g.resolved_seed());
  tc.on_epoch = [](std::size_t e, double tl, double vl) {
    std::cout << "epoch " << e + 1 << " train " << textio::format_fixed(tl, 4);
    if (vl == vl) std::cout << " val " << textio::format_fixed(vl, 4);
    std::cout << std::endl;
  };
  const auto curves = terminal::train_structural(model, train, val, tc);
  const std::string path = out_path(g, "model.ckpt");
  model.save(path);
  write_curve(out_path(g, "train_curve.csv"), curves.train_loss, curves.val_loss);
  std::cout << "wrote " << path << '\n';
}

void run_train_enroute(const Globals& g, const TrainEnrouteOptions& o) {
  Section s(g.config.section("train-enroute"), "train-enroute");
  enroute::EnrouteConfig mc;
  enroute::EnrouteTrainConfig tc;
  std::size_t horizon = 30;
  read_enroute_config(s, mc);
  read_enroute_train_config(s, tc, horizon);
  s.finish();
  if (!o.experiment_case.empty()) {
    mc.use_weather = eval::experiment_case_from_string(o.experiment_case) == eval::ExperimentCase::C2;
  }
  mc.validate();
  if (horizon == 0) throw InvalidArgument("train-enroute: horizon must be positive");
  tc.seed = g.resolved_seed();

  auto load = [&](const std::string& dir) {
    require_file(dir, "en-route dataset");
    auto ds = enroute::load_enroute_dataset(dir, mc.t_obs, horizon, mc.window);
    if (!ds.skipped.empty()) std::cerr << "note: skipped " << ds.skipped.size() << " short flights in " << dir << '\n';
    if (ds.samples.empty()) throw DataError("no usable flight in " + dir);
    return std::move(ds.samples);
  };
  const auto train = load(o.train);
  const auto val = o.val.empty() ? std::vector<enroute::EnrouteSample>{} : load(o.val);

  enroute::DualAttnModel model(mc, enroute::fit_enroute_normalizer(train, mc.dt_s), g.resolved_seed());
  tc.on_epoch = [](std::size_t e, double tl, double vl) {
    std::cout << "epoch " << e + 1 << " train " << textio::format_fixed(tl, 4);
    if (vl == vl) std::cout << " val " << textio::format_fixed(vl, 4);
    std::cout << std::endl;
  };
  const auto curves = enroute::train_enroute(model, train, val, tc);
  const std::string path = out_path(g, "model.ckpt");
  model.save(path);
  write_curve(out_path(g, "train_curve.csv"), curves.train_loss, curves.val_loss);
  std::cout << "wrote " << path << '\n';
}

void run_predict(const Globals& g, const PredictOptions& o) {
  Section s(g.config.section("predict"), "predict");
  std::size_t t_obs = o.t_obs, horizon = o.horizon;
  s.get("t_obs", t_obs);
  s.get("horizon", horizon);
  s.finish();
  if (horizon == 0) throw InvalidArgument("--horizon must be positive");
  const std::string kind = checkpoint_kind(o.model);
  std::ostringstream csv;

  if (kind == "structural") {
    const auto model = terminal::StructuralModel::load(o.model);
    terminal::RolloutOptions ro;
    ro.horizon = horizon;
    ro.sample = !o.mean;
    if (!o.constraints.empty()) {
      require_file(o.constraints, "constraints");
      ro.constraints = constraints::load_constraint_set(o.constraints);
    }
    nn::Rng rng(g.resolved_seed());
    std::size_t scenes = 0, skipped = 0;
    for (const auto& sc : load_scenes(o.input, model.config().scene_radius_m)) {
      if (sc.graph.frame_count() < t_obs) {
        ++skipped;
        continue;
      }
      std::ostringstream one;
      terminal::write_prediction_csv(one, terminal::rollout(model, terminal::truncate_scene(sc, t_obs), ro, rng));
      std::string text = one.str();
      if (scenes++ > 0) text = text.substr(text.find('\n') + 1);
      csv << text;
    }
    if (skipped) std::cerr << "note: " << skipped << " scenes shorter than t_obs\n";
    if (scenes == 0) throw DataError("no scene in " + o.input + " spans t_obs = " + std::to_string(t_obs) + " frames");
  } else if (kind == "dualattn") {
    const auto model = enroute::DualAttnModel::load(o.model);
    require_file(o.input, "en-route dataset");
    const auto ds = enroute::load_enroute_dataset(o.input, model.config().t_obs, 0, model.config().window);
    if (ds.samples.empty()) throw DataError("no flight in " + o.input + " covers t_obs points");
    csv << "flight_id,step,lat,lon,alt\n";
    for (const auto& smp : ds.samples) {
      const auto pred = enroute::predict_enroute(model, smp, horizon);
      for (std::size_t k = 0; k < pred.size(); ++k) {
        csv << smp.flight_id << ',' << k + 1 << ',' << textio::format_double(pred[k].lat) << ','
            << textio::format_double(pred[k].lon) << ',' << textio::format_double(pred[k].alt) << '\n';
      }
    }
  } else {
    throw DataError(o.model + ": unknown model kind '" + kind + "'");
  }
  const std::string path = out_path(g, "predictions.csv");
  textio::write_file(path, csv.str());
  std::cout << "wrote " << path << '\n';
}

void run_evaluate(const Globals& g, const EvaluateOptions& o) {
  const nlohmann::json* sec = g.config.section("evaluate");
  eval::ExperimentConfig cfg = sec ? eval::experiment_config_from_json(*sec) : eval::ExperimentConfig{};
  if (!o.phase.empty()) cfg.phase = phase::phase_from_string(o.phase);
  if (!o.experiment_case.empty()) cfg.experiment_case = eval::experiment_case_from_string(o.experiment_case);
  if (!o.models.empty()) cfg.model_paths = o.models;
  if (!o.data.empty()) cfg.data_path = o.data;
  if (!o.constraints.empty()) cfg.constraints_path = o.constraints;
  if (o.t_obs) cfg.t_obs = *o.t_obs;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.mean) cfg.sample = false;
  if (g.seed || !sec || !sec->contains("seed")) cfg.seed = g.resolved_seed();

  const auto result = eval::run_experiment(cfg);
  for (const auto& n : result.notes) std::cerr << "note: " << n << '\n';
  out_path(g, "");
  eval::write_experiment_reports(g.out, result);
  eval::write_report_text(std::cout, result.reports);
  std::cout << result.cases << " trajectories; wrote " << (fs::path(g.out) / "report.txt").string() << " and "
            << (fs::path(g.out) / "report.csv").string() << '\n';
}

void run_export_geojson(const Globals& g, const ExportGeojsonOptions& o) {
  Section s(g.config.section("export-geojson"), "export-geojson");
  s.finish();
  require_file(o.input, "input");
  const std::string text = textio::read_file(o.input);
  const std::string header(textio::trim(text.substr(0, text.find('\n'))));
  const auto cols = textio::split(header);

  // flight id -> [lon, lat, alt m], in first-seen order
  std::vector<std::string> order;
  std::map<std::string, nlohmann::json> lines;
  auto push = [&](const std::string& id, double lat, double lon, double alt_m) {
    auto [it, fresh] = lines.try_emplace(id, nlohmann::json::array());
    if (fresh) order.push_back(id);
    it->second.push_back({lon, lat, alt_m});
  };
  std::string kind;

  if (!cols.empty() && cols.front() == "timestamp") {
    kind = "observed";
    for (const auto& f : load_flights(o.input))
      for (const auto& p : f.points) push(f.id, p.lat, p.lon, p.alt_ft * 0.3048);
  } else {
    kind = "predicted";
    auto col = [&](std::string_view name) {
      for (std::size_t i = 0; i < cols.size(); ++i)
        if (textio::trim(cols[i]) == name) return i;
      throw DataError(o.input + ": neither a track CSV nor a predictions CSV (no '" + std::string(name) + "' column)");
    };
    const std::size_t c_id = col("flight_id"), c_lat = col("lat"), c_lon = col("lon"), c_alt = col("alt");
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (textio::trim(line).empty()) continue;
      const auto f = textio::split(line);
      const std::size_t need = std::max({c_id, c_lat, c_lon, c_alt});
      std::optional<double> lat, lon, alt;
      if (f.size() > need) {
        lat = textio::parse_double(f[c_lat]);
        lon = textio::parse_double(f[c_lon]);
        alt = textio::parse_double(f[c_alt]);
      }
      if (!lat || !lon || !alt) throw DataError(o.input + ":" + std::to_string(lineno) + ": malformed row");
      push(std::string(f[c_id]), *lat, *lon, *alt);
    }
  }
  if (order.empty()) throw DataError("no rows in " + o.input);

  nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  for (const auto& id : order) {
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", {{"flight_id", id}, {"kind", kind}}},
                              {"geometry", {{"type", "LineString"}, {"coordinates", lines[id]}}}});
  }
  const std::string path = out_path(g, fs::path(o.input).stem().string() + ".geojson");
  textio::write_file(path, fc.dump(1) + "\n");
  std::cout << "wrote " << order.size() << " " << kind << " tracks to " << path << '\n';
}

}  // namespace flightpred::cli
