#include "flightpred/terminal/structural.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flightpred/error.hpp"
#include "flightpred/nn/ops.hpp"
#include "flightpred/textio.hpp"
#include "flightpred/units.hpp"

namespace flightpred::terminal {

using graph::NodeId;
using nn::Tensor;
using units::deg2rad;
using textio::format_double;
using textio::read_file;
using textio::write_file;

namespace {

constexpr double kStepS = 10.0;
constexpr double kStdFloor = 1e-9;
// States survive a gap of one missing frame.
constexpr long kMaxStateGap = 2;

nn::Vec3 geo_vec(const GeoPoint& p) { return {p.lat, p.lon, p.alt}; }

double horizontal_speed(const GeoPoint& a, const GeoPoint& b) { return haversine(a, b) / kStepS; }

struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stddev() const { return n > 1 ? std::max(kStdFloor, std::sqrt(m2 / static_cast<double>(n - 1))) : 1.0; }
};

nn::LstmState bank_state(std::map<NodeId, ModelStateBank::Entry>& m, NodeId key, long t, std::size_t hidden) {
  auto it = m.find(key);
  if (it == m.end() || t - it->second.last_t > kMaxStateGap) return nn::LstmState::zeros(hidden);
  return it->second.state;
}

nn::LstmState bank_state(std::map<std::pair<NodeId, NodeId>, ModelStateBank::Entry>& m,
                         const std::pair<NodeId, NodeId>& key, long t, std::size_t hidden) {
  auto it = m.find(key);
  if (it == m.end() || t - it->second.last_t > kMaxStateGap) return nn::LstmState::zeros(hidden);
  return it->second.state;
}

template <typename Map>
void prune(Map& m, long t) {
  for (auto it = m.begin(); it != m.end();) {
    if (t - it->second.last_t > kMaxStateGap) {
      it = m.erase(it);
    } else {
      ++it;
    }
  }
}

const graph::NodeState* find_in(const graph::SceneFrame& f, NodeId id) {
  auto it = std::lower_bound(f.aircraft.begin(), f.aircraft.end(), id,
                             [](const graph::NodeState& n, NodeId v) { return n.id < v; });
  return (it != f.aircraft.end() && it->id == id) ? &*it : nullptr;
}

// Shared step over explicit frames so that rollout can feed generated frames.
FrameOutput step_frame(const StructuralModel& model, const StructuralWeights& w, const graph::SceneFrame& cur,
                       const graph::SceneFrame* prev, const std::vector<graph::SpatialEdge>& edges,
                       ModelStateBank& bank) {
  const auto& cfg = model.config();
  const std::size_t H = cfg.hidden;
  const long t = cur.t;
  prune(bank.spatial, t);
  prune(bank.temporal, t);
  prune(bank.node, t);

  // (1) Spatial edges, stepped once per direction.
  std::map<NodeId, std::vector<std::pair<NodeId, Tensor>>> incident;
  for (const auto& e : edges) {
    const auto* a = find_in(cur, e.u);
    const auto* b = find_in(cur, e.v);
    if (a == nullptr || b == nullptr) throw InvalidArgument("forward_frame: edge references an absent node");
    for (int dir = 0; dir < 2; ++dir) {
      const auto* from = dir == 0 ? a : b;
      const auto* to = dir == 0 ? b : a;
      const auto key = std::make_pair(from->id, to->id);
      const Tensor x = Tensor::vector(model.spatial_feature(from->pos, to->pos));
      const Tensor emb = nn::embed(x, w.spatial_embed_w, w.spatial_embed_b);
      nn::LstmState s = nn::lstm_cell_step(emb, bank_state(bank.spatial, key, t, H), w.spatial_lstm);
      incident[from->id].emplace_back(to->id, s.h);
      bank.spatial[key] = {std::move(s), t};
    }
  }

  FrameOutput out;
  for (const auto& n : cur.aircraft) {
    // (2) Temporal edge.
    const graph::NodeState* before = prev != nullptr ? find_in(*prev, n.id) : nullptr;
    const Tensor xt = Tensor::vector(model.temporal_feature(before ? &before->pos : nullptr, n.pos));
    const Tensor et = nn::embed(xt, w.temporal_embed_w, w.temporal_embed_b);
    nn::LstmState st = nn::lstm_cell_step(et, bank_state(bank.temporal, n.id, t, H), w.temporal_lstm);
    const Tensor h_vv = st.h;
    bank.temporal[n.id] = {std::move(st), t};

    // (3) Spatial context.
    auto& inc = incident[n.id];
    std::sort(inc.begin(), inc.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    const Tensor e_v = nn::embed(Tensor::vector(model.node_feature(n)), w.node_embed_w, w.node_embed_b);
    Tensor node_in;
    if (cfg.attention) {
      Tensor context = Tensor::zeros({H});
      if (!inc.empty()) {
        std::vector<Tensor> keys;
        for (const auto& [id, h] : inc) keys.push_back(h);
        auto att = nn::scaled_dot_attention(h_vv, keys, w.attn_query, w.attn_key);
        context = att.context;
        auto& rec = out.attention[n.id];
        for (std::size_t i = 0; i < inc.size(); ++i) rec.emplace_back(inc[i].first, att.weights[i]);
      }
      // (4) a_v = embed([h_vv; H_v]).
      const Tensor a_v = nn::embed(nn::concat({h_vv, context}), w.attn_embed_w, w.attn_embed_b);
      node_in = nn::concat({e_v, a_v});
    } else {
      Tensor summed = Tensor::zeros({H});
      for (const auto& [id, h] : inc) summed = nn::add(summed, h);
      node_in = nn::concat({e_v, h_vv, summed});
    }
    nn::LstmState sn = nn::lstm_cell_step(node_in, bank_state(bank.node, n.id, t, H), w.node_lstm);
    // (5) Output head.
    out.heads.emplace(n.id, nn::gaussian3_from_linear(sn.h, w.out_w, w.out_b));
    bank.node[n.id] = {std::move(sn), t};
  }
  return out;
}

StructuralWeights bind(const nn::ParameterSet& ps, bool attention, bool frozen) {
  auto get = [&](const std::string& name) { return frozen ? ps.at(name).detach() : ps.at(name); };
  StructuralWeights w;
  w.spatial_embed_w = get("spatial.embed.W");
  w.spatial_embed_b = get("spatial.embed.b");
  w.spatial_lstm = {get("spatial.lstm.W"), get("spatial.lstm.b")};
  w.temporal_embed_w = get("temporal.embed.W");
  w.temporal_embed_b = get("temporal.embed.b");
  w.temporal_lstm = {get("temporal.lstm.W"), get("temporal.lstm.b")};
  if (attention) {
    w.attn_query = get("attention.query.W");
    w.attn_key = get("attention.key.W");
    w.attn_embed_w = get("attention.embed.W");
    w.attn_embed_b = get("attention.embed.b");
  }
  w.node_embed_w = get("node.embed.W");
  w.node_embed_b = get("node.embed.b");
  w.node_lstm = {get("node.lstm.W"), get("node.lstm.b")};
  w.out_w = get("output.W");
  w.out_b = get("output.b");
  return w;
}

void put_vec3(std::map<std::string, double>& hp, const std::string& key, const nn::Vec3& v) {
  for (int i = 0; i < 3; ++i) hp[key + "." + std::to_string(i)] = v[i];
}

nn::Vec3 get_vec3(const std::map<std::string, double>& hp, const std::string& key) {
  nn::Vec3 v{};
  for (int i = 0; i < 3; ++i) {
    auto it = hp.find(key + "." + std::to_string(i));
    if (it == hp.end()) throw DataError("structural checkpoint: missing " + key);
    v[i] = it->second;
  }
  return v;
}

double get_hp(const std::map<std::string, double>& hp, const std::string& key) {
  auto it = hp.find(key);
  if (it == hp.end()) throw DataError("structural checkpoint: missing hyperparameter " + key);
  return it->second;
}

}  // namespace

void StructuralConfig::validate() const {
  if (hidden == 0 || embed == 0 || attn_dim == 0) throw InvalidArgument("structural config: sizes must be > 0");
  if (!(scene_radius_m > 0.0)) throw InvalidArgument("structural config: scene radius must be > 0");
}

nn::Vec3 Normalizer::position(const GeoPoint& p) const {
  const nn::Vec3 v = geo_vec(p);
  nn::Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = (v[i] - pos_mean[i]) / pos_std[i];
  return out;
}

nn::Vec3 Normalizer::displacement(const GeoPoint& from, const GeoPoint& to) const {
  const nn::Vec3 d{to.lat - from.lat, wrap_angle_deg(to.lon - from.lon), to.alt - from.alt};
  nn::Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = (d[i] - disp_mean[i]) / disp_std[i];
  return out;
}

GeoPoint Normalizer::apply(const GeoPoint& from, const nn::Vec3& normalized) const {
  GeoPoint p{from.lat + disp_mean[0] + disp_std[0] * normalized[0],
             from.lon + disp_mean[1] + disp_std[1] * normalized[1],
             from.alt + disp_mean[2] + disp_std[2] * normalized[2]};
  p.lat = std::clamp(p.lat, -90.0, 90.0);
  p.lon = wrap_angle_deg(p.lon);
  if (p.lon == 180.0) p.lon = -180.0;
  return p;
}

Normalizer fit_normalizer(const std::vector<graph::STGraph>& graphs) {
  std::array<RunningStats, 3> pos, disp;
  RunningStats speed;
  for (const auto& g : graphs) {
    for (std::size_t t = 0; t < g.frames.size(); ++t) {
      for (const auto& n : g.frames[t].aircraft) {
        const nn::Vec3 v = geo_vec(n.pos);
        for (int i = 0; i < 3; ++i) pos[i].add(v[i]);
        if (t == 0) continue;
        const auto* before = find_in(g.frames[t - 1], n.id);
        if (before == nullptr) continue;
        disp[0].add(n.pos.lat - before->pos.lat);
        disp[1].add(wrap_angle_deg(n.pos.lon - before->pos.lon));
        disp[2].add(n.pos.alt - before->pos.alt);
        speed.add(horizontal_speed(before->pos, n.pos));
      }
    }
  }
  if (pos[0].n == 0) throw DataError("fit_normalizer: no nodes");
  Normalizer nm;
  for (int i = 0; i < 3; ++i) {
    nm.pos_mean[i] = pos[i].mean;
    nm.pos_std[i] = pos[i].stddev();
    if (disp[i].n > 0) {
      nm.disp_mean[i] = disp[i].mean;
      nm.disp_std[i] = disp[i].stddev();
    }
  }
  if (speed.n > 0) {
    nm.speed_mean = speed.mean;
    nm.speed_std = speed.stddev();
  }
  return nm;
}

StructuralModel::StructuralModel(StructuralConfig cfg, Normalizer norm, std::uint64_t seed)
    : cfg_(cfg), norm_(norm), seed_(seed) {
  cfg_.validate();
  nn::Rng rng(seed);
  const std::size_t E = cfg_.embed, H = cfg_.hidden;
  params_.add_uniform("spatial.embed.W", {E, kEdgeFeatureDim}, rng);
  params_.add("spatial.embed.b", {E});
  nn::LstmWeights::create(params_, "spatial.lstm", E, H, rng);
  params_.add_uniform("temporal.embed.W", {E, kTemporalFeatureDim}, rng);
  params_.add("temporal.embed.b", {E});
  nn::LstmWeights::create(params_, "temporal.lstm", E, H, rng);
  if (cfg_.attention) {
    params_.add_uniform("attention.query.W", {cfg_.attn_dim, H}, rng);
    params_.add_uniform("attention.key.W", {cfg_.attn_dim, H}, rng);
    params_.add_uniform("attention.embed.W", {E, 2 * H}, rng);
    params_.add("attention.embed.b", {E});
  }
  params_.add_uniform("node.embed.W", {E, 3 + kTypeClasses + cfg_.weather_dim}, rng);
  params_.add("node.embed.b", {E});
  nn::LstmWeights::create(params_, "node.lstm", cfg_.attention ? 2 * E : E + 2 * H, H, rng);
  params_.add_uniform("output.W", {9, H}, rng);
  params_.add("output.b", {9});
}

StructuralWeights StructuralModel::weights() const { return bind(params_, cfg_.attention, false); }

StructuralWeights StructuralModel::frozen_weights() const { return bind(params_, cfg_.attention, true); }

StructuralWeights StructuralModel::bind_tensors(const std::vector<nn::Tensor>& ordered) const {
  const auto& entries = params_.entries();
  if (ordered.size() != entries.size()) throw InvalidArgument("bind_tensors: expected one tensor per parameter");
  nn::ParameterSet view;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (ordered[i].shape() != entries[i].tensor.shape()) {
      throw InvalidArgument("bind_tensors: shape mismatch for " + entries[i].name);
    }
    view.entries().push_back({entries[i].name, ordered[i]});
  }
  return bind(view, cfg_.attention, false);
}

std::vector<double> StructuralModel::node_feature(const graph::NodeState& n) const {
  std::vector<double> x(3 + kTypeClasses + cfg_.weather_dim, 0.0);
  const nn::Vec3 p = norm_.position(n.pos);
  std::copy(p.begin(), p.end(), x.begin());
  const auto type = static_cast<std::size_t>(std::clamp(n.type_code, 0, static_cast<int>(kTypeClasses) - 1));
  x[3 + type] = 1.0;
  if (!n.weather.empty()) {
    if (n.weather.size() != cfg_.weather_dim) throw InvalidArgument("node weather vector has the wrong length");
    std::copy(n.weather.begin(), n.weather.end(), x.begin() + 3 + kTypeClasses);
  }
  return x;
}

std::vector<double> StructuralModel::spatial_feature(const GeoPoint& from, const GeoPoint& to) const {
  const auto f = graph::edge_feature(from, to);
  const double b = deg2rad(f.bearing_deg);
  return {f.distance_m / cfg_.scene_radius_m, std::sin(b), std::cos(b), f.altitude_delta_m / 1000.0};
}

std::vector<double> StructuralModel::temporal_feature(const GeoPoint* prev, const GeoPoint& cur) const {
  if (prev == nullptr) return std::vector<double>(kTemporalFeatureDim, 0.0);
  const nn::Vec3 d = norm_.displacement(*prev, cur);
  return {d[0], d[1], d[2], (horizontal_speed(*prev, cur) - norm_.speed_mean) / norm_.speed_std};
}

std::string StructuralModel::encode() const {
  nn::CheckpointMeta meta;
  meta.seed = seed_;
  auto& hp = meta.hyperparameters;
  hp["hidden"] = static_cast<double>(cfg_.hidden);
  hp["embed"] = static_cast<double>(cfg_.embed);
  hp["attn_dim"] = static_cast<double>(cfg_.attn_dim);
  hp["weather_dim"] = static_cast<double>(cfg_.weather_dim);
  hp["attention"] = cfg_.attention ? 1.0 : 0.0;
  hp["scene_radius_m"] = cfg_.scene_radius_m;
  put_vec3(hp, "norm.pos_mean", norm_.pos_mean);
  put_vec3(hp, "norm.pos_std", norm_.pos_std);
  put_vec3(hp, "norm.disp_mean", norm_.disp_mean);
  put_vec3(hp, "norm.disp_std", norm_.disp_std);
  hp["norm.speed_mean"] = norm_.speed_mean;
  hp["norm.speed_std"] = norm_.speed_std;
  meta.tags["model"] = "structural";
  return nn::encode_checkpoint(params_, meta);
}

void StructuralModel::save(const std::string& path) const { write_file(path, encode()); }

StructuralModel StructuralModel::from_checkpoint(const nn::Checkpoint& ck) {
  auto tag = ck.meta.tags.find("model");
  if (tag == ck.meta.tags.end() || tag->second != "structural") {
    throw DataError("checkpoint does not hold a structural model");
  }
  const auto& hp = ck.meta.hyperparameters;
  StructuralConfig cfg;
  cfg.hidden = static_cast<std::size_t>(get_hp(hp, "hidden"));
  cfg.embed = static_cast<std::size_t>(get_hp(hp, "embed"));
  cfg.attn_dim = static_cast<std::size_t>(get_hp(hp, "attn_dim"));
  cfg.weather_dim = static_cast<std::size_t>(get_hp(hp, "weather_dim"));
  cfg.attention = get_hp(hp, "attention") != 0.0;
  cfg.scene_radius_m = get_hp(hp, "scene_radius_m");
  Normalizer nm;
  nm.pos_mean = get_vec3(hp, "norm.pos_mean");
  nm.pos_std = get_vec3(hp, "norm.pos_std");
  nm.disp_mean = get_vec3(hp, "norm.disp_mean");
  nm.disp_std = get_vec3(hp, "norm.disp_std");
  nm.speed_mean = get_hp(hp, "norm.speed_mean");
  nm.speed_std = get_hp(hp, "norm.speed_std");
  StructuralModel m(cfg, nm, ck.meta.seed);
  nn::assign_parameters(m.params_, ck.params);
  return m;
}

StructuralModel StructuralModel::load(const std::string& path) {
  return from_checkpoint(nn::decode_checkpoint(read_file(path)));
}

FrameOutput forward_frame(const StructuralModel& model, const StructuralWeights& w, const graph::STGraph& g,
                          std::size_t t, ModelStateBank& bank) {
  if (t >= g.frame_count()) throw InvalidArgument("forward_frame: frame index out of range");
  const graph::SceneFrame* prev = t > 0 ? &g.frames[t - 1] : nullptr;
  return step_frame(model, w, g.frames[t], prev, g.spatial_edges[t], bank);
}

Tensor nll_sequence_loss(const StructuralModel& model, const StructuralWeights& w, const graph::STGraph& g,
                         std::size_t t_obs, std::size_t t_pred) {
  if (t_obs == 0 || t_obs >= t_pred) throw InvalidArgument("nll_sequence_loss: need 0 < t_obs < t_pred");
  if (t_pred > g.frame_count()) {
    throw InvalidArgument("nll_sequence_loss: horizon exceeds the " + std::to_string(g.frame_count()) +
                          " available frames");
  }
  ModelStateBank bank;
  std::vector<Tensor> terms;
  for (std::size_t t = 0; t + 1 < t_pred; ++t) {
    FrameOutput out = forward_frame(model, w, g, t, bank);
    if (t + 1 < t_obs) continue;
    for (const auto& n : g.frames[t + 1].aircraft) {
      auto it = out.heads.find(n.id);
      if (it == out.heads.end()) continue;
      const auto* from = find_in(g.frames[t], n.id);
      const nn::Vec3 target = model.normalizer().displacement(from->pos, n.pos);
      terms.push_back(nn::gaussian3_nll(std::span<const double, 3>(target), it->second));
    }
  }
  if (terms.empty()) return Tensor::scalar(0.0);
  return nn::sum(nn::concat(terms));
}

double mean_loss(const StructuralModel& model, const std::vector<graph::STGraph>& graphs, std::size_t t_obs,
                 std::size_t t_pred) {
  if (graphs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const StructuralWeights w = model.frozen_weights();
  double total = 0.0;
  for (const auto& g : graphs) total += nll_sequence_loss(model, w, g, t_obs, t_pred).item();
  return total / static_cast<double>(graphs.size());
}

TrainCurves train_structural(StructuralModel& model, const std::vector<graph::STGraph>& train,
                             const std::vector<graph::STGraph>& val, const StructuralTrainConfig& cfg) {
  if (train.empty()) throw InvalidArgument("train_structural: empty training set");
  TrainCurves curves;
  curves.initial_train_loss = mean_loss(model, train, cfg.t_obs, cfg.t_pred);
  nn::Adam adam(cfg.adam);
  nn::Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const StructuralWeights w = model.weights();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t k = 0; k < order.size(); ++k) {
      model.params().zero_grad();
      try {
        Tensor loss = nll_sequence_loss(model, w, train[order[k]], cfg.t_obs, cfg.t_pred);
        loss.backward();
      } catch (const NumericError& e) {
        throw NumericError("structural training diverged at epoch " + std::to_string(epoch) + ", scene " +
                           std::to_string(order[k]) + ": " + e.what());
      }
      nn::clip_grad_norm(model.params(), cfg.clip_norm);
      adam.step(model.params());
    }
    curves.train_loss.push_back(mean_loss(model, train, cfg.t_obs, cfg.t_pred));
    curves.val_loss.push_back(mean_loss(model, val, cfg.t_obs, cfg.t_pred));
    if (!std::isfinite(curves.train_loss.back())) {
      throw NumericError("structural training diverged at epoch " + std::to_string(epoch));
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, curves.train_loss.back(), curves.val_loss.back());
  }
  model.params().zero_grad();
  return curves;
}

TrajectoryPrediction rollout(const StructuralModel& model, const Scene& observed, const RolloutOptions& opts,
                             nn::Rng& rng) {
  const auto& g = observed.graph;
  if (g.frame_count() == 0) throw InvalidArgument("rollout: empty observation window");
  if (opts.constraints) opts.constraints->validate();
  TrajectoryPrediction pred;
  pred.flight_ids = observed.flight_ids;
  if (opts.horizon == 0) return pred;

  const StructuralWeights w = model.frozen_weights();
  const Normalizer& nm = model.normalizer();
  ModelStateBank bank;
  FrameOutput out;
  for (std::size_t t = 0; t < g.frame_count(); ++t) out = forward_frame(model, w, g, t, bank);

  graph::SceneFrame prev_frame = g.frames.back();
  const graph::SceneFrame* before_prev = g.frame_count() > 1 ? &g.frames[g.frame_count() - 2] : nullptr;
  std::map<NodeId, double> heading;
  for (const auto& n : prev_frame.aircraft) {
    const auto* b = before_prev ? find_in(*before_prev, n.id) : nullptr;
    heading[n.id] = (b != nullptr && haversine(b->pos, n.pos) > 0.0) ? initial_bearing(b->pos, n.pos)
                                                                       : std::numeric_limits<double>::quiet_NaN();
    pred.nodes[n.id];
  }

  for (std::size_t k = 0; k < opts.horizon; ++k) {
    graph::SceneFrame next;
    next.t = prev_frame.t + 1;
    for (const auto& n : prev_frame.aircraft) {
      const nn::GaussianParams3 norm_dist = out.heads.at(n.id).values();
      StepPrediction sp;
      sp.t = next.t;
      const GeoPoint mean_pt = nm.apply(n.pos, norm_dist.mu);
      sp.dist.mu = {n.pos.lat + nm.disp_mean[0] + nm.disp_std[0] * norm_dist.mu[0],
                    n.pos.lon + nm.disp_mean[1] + nm.disp_std[1] * norm_dist.mu[1],
                    n.pos.alt + nm.disp_mean[2] + nm.disp_std[2] * norm_dist.mu[2]};
      for (int i = 0; i < 3; ++i) sp.dist.sigma[i] = nm.disp_std[i] * norm_dist.sigma[i];
      sp.dist.rho = norm_dist.rho;

      const auto ph_it = observed.phases.find(n.id);
      const phase::Phase ph = ph_it == observed.phases.end() ? phase::Phase::enroute : ph_it->second;
      if (!opts.sample) {
        sp.point = mean_pt;
      } else if (opts.constraints && ph != phase::Phase::enroute) {
        auto r = constraints::infer_step(sp.dist, n.pos, heading[n.id], ph, *opts.constraints, kStepS, rng);
        sp.point = r.point;
        sp.passed = r.passed;
        sp.draws = r.samples_drawn;
        if (!r.passed) ++pred.fallbacks;
      } else {
        const nn::Vec3 s = nn::gaussian3_sample(norm_dist, rng);
        sp.point = nm.apply(n.pos, s);
      }
      if (haversine(n.pos, sp.point) > 0.0) heading[n.id] = initial_bearing(n.pos, sp.point);
      next.aircraft.push_back(graph::NodeState{n.id, sp.point, n.type_code, n.weather});
      pred.nodes[n.id].push_back(sp);
    }
    if (k + 1 == opts.horizon) break;
    const auto edges = graph::spatial_edges_for(next, g.scene_radius_m);
    out = step_frame(model, w, next, &prev_frame, edges, bank);
    prev_frame = std::move(next);
  }
  return pred;
}

void write_prediction_csv(std::ostream& os, const TrajectoryPrediction& pred) {
  os << "node_id,flight_id,t,mu_lat,mu_lon,mu_alt,sigma_lat,sigma_lon,sigma_alt,rho_xy,rho_xz,rho_yz,lat,lon,alt,"
        "passed\n";
  for (const auto& [id, steps] : pred.nodes) {
    const std::string fid = id < pred.flight_ids.size() ? pred.flight_ids[id] : std::string{};
    for (const auto& s : steps) {
      os << id << ',' << fid << ',' << s.t;
      for (double v : s.dist.mu) os << ',' << format_double(v);
      for (double v : s.dist.sigma) os << ',' << format_double(v);
      for (double v : s.dist.rho) os << ',' << format_double(v);
      os << ',' << format_double(s.point.lat) << ',' << format_double(s.point.lon) << ','
         << format_double(s.point.alt) << ',' << (s.passed ? 1 : 0) << '\n';
    }
  }
}

std::string prediction_geojson(const TrajectoryPrediction& pred) {
  nlohmann::json fc{{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  for (const auto& [id, steps] : pred.nodes) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& s : steps) coords.push_back({s.point.lon, s.point.lat, s.point.alt});
    const std::string fid = id < pred.flight_ids.size() ? pred.flight_ids[id] : std::to_string(id);
    fc["features"].push_back({{"type", "Feature"},
                              {"properties", {{"flight_id", fid}, {"node_id", id}}},
                              {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  return fc.dump(2);
}

}  // namespace flightpred::terminal
