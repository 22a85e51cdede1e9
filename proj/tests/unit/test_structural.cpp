#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flightpred/data/synthetic.hpp"
#include "flightpred/error.hpp"
#include "flightpred/nn/gradcheck.hpp"
#include "flightpred/nn/ops.hpp"
#include "flightpred/terminal/structural.hpp"

using namespace flightpred;
using namespace flightpred::terminal;
using graph::NodeId;
using graph::NodeState;
using graph::SceneFrame;

namespace {

StructuralConfig tiny(bool attention = true) {
  StructuralConfig c;
  c.hidden = 6;
  c.embed = 4;
  c.attn_dim = 3;
  c.attention = attention;
  return c;
}

Normalizer unit_norm() {
  Normalizer n;
  n.pos_mean = {28.0, -81.0, 1000.0};
  n.pos_std = {0.1, 0.1, 500.0};
  n.disp_mean = {-0.005, 0.0, -30.0};
  n.disp_std = {0.002, 0.002, 20.0};
  n.speed_mean = 70.0;
  n.speed_std = 10.0;
  return n;
}

NodeState ns(NodeId id, double lat, double lon, double alt) { return NodeState{id, {lat, lon, alt}, 1, {}}; }

// Straight southbound aircraft starting at `lat0`.
std::vector<SceneFrame> straight_frames(std::size_t n, std::vector<std::pair<NodeId, double>> starts,
                                        double dlat = -0.006, double dalt = -35.0) {
  std::vector<SceneFrame> frames;
  for (std::size_t t = 0; t < n; ++t) {
    SceneFrame f{static_cast<long>(t), {}};
    for (const auto& [id, lat0] : starts) {
      f.aircraft.push_back(ns(id, lat0 + dlat * static_cast<double>(t), -81.0 + 0.01 * id,
                              3000.0 + dalt * static_cast<double>(t)));
    }
    frames.push_back(f);
  }
  return frames;
}

// ---- Scripted forward oracle: plain loops over the parameter values. ----
using V = std::vector<double>;

struct Oracle {
  const StructuralModel& m;
  std::map<std::string, V> p;
  std::map<std::string, std::vector<std::size_t>> shape;
  std::map<std::pair<NodeId, NodeId>, std::pair<V, V>> spatial;
  std::map<NodeId, std::pair<V, V>> temporal, node;

  explicit Oracle(const StructuralModel& model) : m(model) {
    for (const auto& e : model.params().entries()) {
      p[e.name] = e.tensor.to_vector();
      shape[e.name] = e.tensor.shape();
    }
  }

  V matvec(const std::string& w, const V& x) const {
    const auto& s = shape.at(w);
    V y(s[0], 0.0);
    for (std::size_t r = 0; r < s[0]; ++r)
      for (std::size_t c = 0; c < s[1]; ++c) y[r] += p.at(w)[r * s[1] + c] * x[c];
    return y;
  }
  V embed(const std::string& name, const V& x) const {
    V y = matvec(name + ".W", x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, y[i] + p.at(name + ".b")[i]);
    return y;
  }
  std::pair<V, V> lstm(const std::string& name, const V& x, const std::pair<V, V>& st) const {
    V xh = x;
    xh.insert(xh.end(), st.first.begin(), st.first.end());
    V z = matvec(name + ".W", xh);
    const std::size_t H = st.first.size();
    V h(H), c(H);
    auto sg = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    for (std::size_t j = 0; j < H; ++j) {
      const double i = sg(z[j] + p.at(name + ".b")[j]);
      const double f = sg(z[H + j] + p.at(name + ".b")[H + j]);
      const double g = std::tanh(z[2 * H + j] + p.at(name + ".b")[2 * H + j]);
      const double o = sg(z[3 * H + j] + p.at(name + ".b")[3 * H + j]);
      c[j] = f * st.second[j] + i * g;
      h[j] = o * std::tanh(c[j]);
    }
    return {h, c};
  }

  std::map<NodeId, V> step(const SceneFrame& cur, const SceneFrame* prev, const std::vector<graph::SpatialEdge>& edges) {
    const std::size_t H = m.config().hidden;
    const std::pair<V, V> zero{V(H, 0.0), V(H, 0.0)};
    std::map<NodeId, std::vector<std::pair<NodeId, V>>> inc;
    auto pos_of = [&](const SceneFrame& f, NodeId id) -> const GeoPoint* {
      for (const auto& n : f.aircraft)
        if (n.id == id) return &n.pos;
      return nullptr;
    };
    for (const auto& e : edges) {
      for (int d = 0; d < 2; ++d) {
        const NodeId a = d == 0 ? e.u : e.v, b = d == 0 ? e.v : e.u;
        const auto key = std::make_pair(a, b);
        const auto st = spatial.count(key) ? spatial[key] : zero;
        spatial[key] = lstm("spatial.lstm", embed("spatial.embed", m.spatial_feature(*pos_of(cur, a), *pos_of(cur, b))), st);
        inc[a].emplace_back(b, spatial[key].first);
      }
    }
    std::map<NodeId, V> mu;
    for (const auto& n : cur.aircraft) {
      const GeoPoint* before = prev ? pos_of(*prev, n.id) : nullptr;
      temporal[n.id] = lstm("temporal.lstm", embed("temporal.embed", m.temporal_feature(before, n.pos)),
                            temporal.count(n.id) ? temporal[n.id] : zero);
      const V& hvv = temporal[n.id].first;
      V ctx(H, 0.0);
      auto& keys = inc[n.id];
      std::sort(keys.begin(), keys.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
      if (!keys.empty()) {
        const V q = matvec("attention.query.W", hvv);
        V s;
        for (const auto& [id, h] : keys) {
          const V k = matvec("attention.key.W", h);
          double dotv = 0.0;
          for (std::size_t i = 0; i < q.size(); ++i) dotv += q[i] * k[i];
          s.push_back(static_cast<double>(keys.size()) / std::sqrt(static_cast<double>(q.size())) * dotv);
        }
        const double mx = *std::max_element(s.begin(), s.end());
        double z = 0.0;
        for (double& v : s) z += (v = std::exp(v - mx));
        for (std::size_t i = 0; i < keys.size(); ++i)
          for (std::size_t j = 0; j < H; ++j) ctx[j] += s[i] / z * keys[i].second[j];
      }
      V hc = hvv;
      hc.insert(hc.end(), ctx.begin(), ctx.end());
      V in = embed("node.embed", m.node_feature(n));
      const V a = embed("attention.embed", hc);
      in.insert(in.end(), a.begin(), a.end());
      node[n.id] = lstm("node.lstm", in, node.count(n.id) ? node[n.id] : zero);
      V raw = matvec("output.W", node[n.id].first);
      mu[n.id] = {raw[0] + p.at("output.b")[0], raw[1] + p.at("output.b")[1], raw[2] + p.at("output.b")[2]};
    }
    return mu;
  }
};

}  // namespace

TEST(Structural, IsolatedNodeStillPredicts) {
  StructuralModel m(tiny(), unit_norm(), 0);
  auto g = graph::build_st_graph(straight_frames(2, {{0, 28.2}}));
  ModelStateBank bank;
  auto out = forward_frame(m, m.frozen_weights(), g, 0, bank);
  ASSERT_EQ(out.heads.size(), 1u);
  EXPECT_TRUE(out.attention.empty());
  EXPECT_TRUE(out.heads.at(0).values().valid());
}

TEST(Structural, SymmetricPairGetsEqualOutputs) {
  StructuralModel m(tiny(), unit_norm(), 1);
  auto g = graph::build_st_graph({{0, {ns(3, 28.1, -81.0, 2000.0), ns(5, 28.1, -81.0, 2000.0)}}});
  ModelStateBank bank;
  auto out = forward_frame(m, m.frozen_weights(), g, 0, bank);
  const auto a = out.heads.at(3).values(), b = out.heads.at(5).values();
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.sigma, b.sigma);
}

TEST(Structural, ForwardMatchesScriptedOracle) {
  StructuralModel m(tiny(), unit_norm(), 0);
  auto frames = straight_frames(3, {{0, 28.20}, {1, 28.25}, {2, 28.31}});
  auto g = graph::build_st_graph(frames);
  ASSERT_GT(g.spatial_edge_count(), 0u);
  ModelStateBank bank;
  Oracle oracle(m);
  const auto w = m.frozen_weights();
  for (std::size_t t = 0; t < g.frame_count(); ++t) {
    auto out = forward_frame(m, w, g, t, bank);
    auto ref = oracle.step(g.frames[t], t ? &g.frames[t - 1] : nullptr, g.spatial_edges[t]);
    for (const auto& [id, mu] : ref) {
      const auto got = out.heads.at(id).values().mu;
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], mu[i], 1e-9) << "t " << t << " node " << id;
    }
  }
}

TEST(Structural, AttentionWeightsNormalized) {
  StructuralModel m(tiny(), unit_norm(), 2);
  auto g = graph::build_st_graph(straight_frames(1, {{0, 28.20}, {1, 28.25}, {2, 28.31}}));
  ModelStateBank bank;
  auto out = forward_frame(m, m.frozen_weights(), g, 0, bank);
  for (const auto& [id, ws] : out.attention) {
    double s = 0.0;
    for (const auto& [nb, wt] : ws) s += wt;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  auto g2 = graph::build_st_graph(straight_frames(1, {{0, 28.20}, {1, 28.25}}));
  ModelStateBank bank2;
  auto out2 = forward_frame(m, m.frozen_weights(), g2, 0, bank2);
  ASSERT_EQ(out2.attention.at(0).size(), 1u);
  EXPECT_EQ(out2.attention.at(0)[0].second, 1.0);
}

TEST(StructuralLoss, ClosedFormAtTruth) {
  Normalizer n = unit_norm();
  StructuralModel m(tiny(), n, 0);
  for (auto& e : m.params().entries()) {
    if (e.name.rfind("output", 0) == 0) std::fill(e.tensor.mutable_values().begin(), e.tensor.mutable_values().end(), 0.0);
  }
  // Displacement equal to the normalizer mean: normalized target is zero.
  auto g = graph::build_st_graph(straight_frames(2, {{0, 28.2}}, n.disp_mean[0], n.disp_mean[2]));
  const double loss = nll_sequence_loss(m, m.frozen_weights(), g, 1, 2).item();
  EXPECT_NEAR(loss, 1.5 * std::log(2.0 * std::numbers::pi), 1e-9);
}

TEST(StructuralLoss, AdditiveOverDisconnectedGroups) {
  StructuralModel m(tiny(), unit_norm(), 4);
  auto a = straight_frames(5, {{0, 28.20}});
  auto b = straight_frames(5, {{1, 29.50}});
  auto both = a;
  for (std::size_t t = 0; t < both.size(); ++t) both[t].aircraft.push_back(b[t].aircraft[0]);
  const auto w = m.frozen_weights();
  const double la = nll_sequence_loss(m, w, graph::build_st_graph(a), 2, 5).item();
  const double lb = nll_sequence_loss(m, w, graph::build_st_graph(b), 2, 5).item();
  const double lab = nll_sequence_loss(m, w, graph::build_st_graph(both), 2, 5).item();
  EXPECT_NEAR(lab, la + lb, 1e-9 * std::abs(lab));
}

TEST(StructuralLoss, HorizonBeyondFramesThrows) {
  StructuralModel m(tiny(), unit_norm(), 0);
  auto g = graph::build_st_graph(straight_frames(3, {{0, 28.2}}));
  EXPECT_THROW(nll_sequence_loss(m, m.frozen_weights(), g, 1, 4), InvalidArgument);
}

TEST(StructuralLoss, FiniteForRandomParamsAndScenes) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    StructuralModel m(tiny(), unit_norm(), seed);
    std::vector<SceneFrame> frames;
    for (long t = 0; t < 4; ++t) {
      SceneFrame f{t, {}};
      for (NodeId id = 0; id < 3; ++id) f.aircraft.push_back(ns(id, 28.2 + u(rng), -81.0 + u(rng), 2000.0 + 1000 * u(rng)));
      frames.push_back(f);
    }
    EXPECT_TRUE(std::isfinite(nll_sequence_loss(m, m.frozen_weights(), graph::build_st_graph(frames), 1, 4).item()));
  }
}

TEST(StructuralLoss, GradientSharedAcrossGroups) {
  StructuralModel m(tiny(), unit_norm(), 6);
  auto a = straight_frames(4, {{0, 28.20}, {1, 28.26}});
  auto b = straight_frames(4, {{2, 29.60}, {3, 29.65}}, -0.005, -20.0);
  auto both = a;
  for (std::size_t t = 0; t < both.size(); ++t)
    both[t].aircraft.insert(both[t].aircraft.end(), b[t].aircraft.begin(), b[t].aircraft.end());
  auto grads = [&](const std::vector<SceneFrame>& fr) {
    m.params().zero_grad();
    nll_sequence_loss(m, m.weights(), graph::build_st_graph(fr), 1, 4).backward();
    std::vector<std::vector<double>> g;
    for (const auto& e : m.params().entries()) g.emplace_back(e.tensor.grad().begin(), e.tensor.grad().end());
    return g;
  };
  const auto ga = grads(a), gb = grads(b), gab = grads(both);
  for (std::size_t i = 0; i < gab.size(); ++i)
    for (std::size_t j = 0; j < gab[i].size(); ++j) EXPECT_NEAR(gab[i][j], ga[i][j] + gb[i][j], 1e-9);
  m.params().zero_grad();
}

TEST(StructuralLoss, EndToEndGradcheck) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    StructuralModel m(tiny(), unit_norm(), seed);
    // Zero biases put every ReLU of an all-zero feature exactly on its kink.
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (auto& e : m.params().entries())
      for (double& v : e.tensor.mutable_values()) v += jitter(rng);
    auto g = graph::build_st_graph(straight_frames(4, {{0, 28.20}, {1, 28.26}}));
    std::vector<nn::Tensor> inputs;
    for (const auto& e : m.params().entries()) inputs.push_back(e.tensor);
    auto fn = [&](const std::vector<nn::Tensor>& v) { return nll_sequence_loss(m, m.bind_tensors(v), g, 1, 4); };
    EXPECT_LT(nn::finite_diff_gradcheck(fn, inputs), 1e-4);
  }
}

TEST(StructuralModel, ParameterShapesIndependentOfAircraftCount) {
  StructuralModel m(tiny(), unit_norm(), 0);
  const std::string before = m.encode();
  ModelStateBank bank;
  forward_frame(m, m.frozen_weights(), graph::build_st_graph(straight_frames(1, {{0, 28.2}, {1, 28.25}, {2, 28.3}, {3, 28.32}})), 0, bank);
  EXPECT_EQ(m.encode(), before);
  StructuralModel swsa(tiny(false), unit_norm(), 0);
  EXPECT_FALSE(swsa.params().contains("attention.query.W"));
}

TEST(StructuralModel, CheckpointRoundTrip) {
  StructuralModel m(tiny(), unit_norm(), 3);
  auto back = StructuralModel::from_checkpoint(nn::decode_checkpoint(m.encode()));
  EXPECT_EQ(back.encode(), m.encode());
  EXPECT_EQ(back.normalizer().disp_std, m.normalizer().disp_std);
}

namespace {

std::vector<graph::STGraph> straight_dataset(std::size_t n) {
  std::vector<graph::STGraph> out;
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(graph::build_st_graph(straight_frames(8, {{0, 28.0 + 0.01 * static_cast<double>(k)}})));
  return out;
}

}  // namespace

TEST(StructuralTrain, LossDecreasesOnStraightLines) {
  auto data = straight_dataset(50);
  StructuralModel m(tiny(), fit_normalizer(data), 0);
  StructuralTrainConfig cfg;
  cfg.epochs = 30;
  cfg.t_obs = 3;
  cfg.t_pred = 8;
  auto curves = train_structural(m, data, {}, cfg);
  ASSERT_EQ(curves.train_loss.size(), 30u);
  EXPECT_LT(curves.train_loss.back(), curves.initial_train_loss);
}

TEST(StructuralTrain, ZeroEpochsKeepsInit) {
  auto data = straight_dataset(3);
  StructuralModel m(tiny(), fit_normalizer(data), 0);
  const std::string init = m.encode();
  StructuralTrainConfig cfg;
  cfg.epochs = 0;
  cfg.t_obs = 3;
  cfg.t_pred = 8;
  train_structural(m, data, {}, cfg);
  EXPECT_EQ(m.encode(), init);
}

TEST(StructuralTrain, SameSeedSameCheckpoint) {
  auto data = straight_dataset(5);
  StructuralTrainConfig cfg;
  cfg.epochs = 2;
  cfg.t_obs = 3;
  cfg.t_pred = 8;
  StructuralModel a(tiny(), fit_normalizer(data), 5), b(tiny(), fit_normalizer(data), 5);
  train_structural(a, data, {}, cfg);
  train_structural(b, data, {}, cfg);
  EXPECT_EQ(a.encode(), b.encode());
}

namespace {

Scene approach_scene(std::size_t frames) {
  data::ScenarioConfig cfg;
  cfg.steps = frames;
  cfg.seed = 3;
  return build_scene(data::gen_synthetic_scenario(cfg).flights);
}

}  // namespace

TEST(Rollout, HorizonZeroIsEmpty) {
  auto scene = approach_scene(10);
  StructuralModel m(tiny(), fit_normalizer({scene.graph}), 0);
  nn::Rng rng(0);
  RolloutOptions o;
  o.horizon = 0;
  auto p = rollout(m, scene, o, rng);
  EXPECT_TRUE(p.nodes.empty());
}

TEST(Rollout, TinySigmaFollowsMeanPath) {
  auto scene = approach_scene(10);
  StructuralModel m(tiny(), fit_normalizer({scene.graph}), 0);
  auto& w = m.params().at("output.W");
  auto& b = m.params().at("output.b");
  for (std::size_t r = 3; r < 6; ++r) {
    for (std::size_t c = 0; c < w.dim(1); ++c) w.mutable_values()[r * w.dim(1) + c] = 0.0;
    b.mutable_values()[r] = -30.0;
  }
  RolloutOptions mean_opts;
  mean_opts.horizon = 6;
  mean_opts.sample = false;
  RolloutOptions sample_opts = mean_opts;
  sample_opts.sample = true;
  nn::Rng r1(1), r2(2);
  auto pm = rollout(m, scene, mean_opts, r1);
  auto ps = rollout(m, scene, sample_opts, r2);
  for (const auto& [id, steps] : pm.nodes) {
    ASSERT_EQ(steps.size(), 6u);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      EXPECT_NEAR(steps[k].point.lat, ps.nodes.at(id)[k].point.lat, 1e-9);
      EXPECT_NEAR(steps[k].point.alt, ps.nodes.at(id)[k].point.alt, 1e-6);
    }
  }
}

TEST(Rollout, ConstrainedPassPointsSatisfyLimits) {
  auto scene = approach_scene(12);
  StructuralModel m(tiny(), fit_normalizer({scene.graph}), 0);
  constraints::ConstraintSet cs;
  cs.theta_c = 10.0;
  cs.theta_d = 3.5;
  cs.omega_rot = 3.0;
  RolloutOptions o;
  o.horizon = 20;
  o.constraints = cs;
  nn::Rng rng(5);
  auto p = rollout(m, scene, o, rng);
  std::size_t checked = 0;
  for (const auto& [id, steps] : p.nodes) {
    const auto& obs = scene.graph.frames.back();
    GeoPoint prev = scene.graph.find(obs.t, id)->pos;
    const GeoPoint before = scene.graph.find(obs.t - 1, id)->pos;
    double heading = initial_bearing(before, prev);
    for (const auto& s : steps) {
      EXPECT_LE(s.draws, cs.max_resample);
      if (s.passed) {
        EXPECT_TRUE(constraints::check(prev, heading, s.point, scene.phases.at(id), cs, 10.0).pass);
        ++checked;
      }
      if (haversine(prev, s.point) > 0.0) heading = initial_bearing(prev, s.point);
      prev = s.point;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Rollout, DeterministicAndSerializable) {
  auto scene = truncate_scene(approach_scene(12), 8);
  StructuralModel m(tiny(), fit_normalizer({scene.graph}), 0);
  RolloutOptions o;
  o.horizon = 5;
  nn::Rng a(42), b(42);
  std::ostringstream ca, cb;
  write_prediction_csv(ca, rollout(m, scene, o, a));
  write_prediction_csv(cb, rollout(m, scene, o, b));
  EXPECT_EQ(ca.str(), cb.str());
  nn::Rng c(42);
  const auto json = nlohmann::json::parse(prediction_geojson(rollout(m, scene, o, c)));
  EXPECT_EQ(json["type"], "FeatureCollection");
  EXPECT_EQ(json["features"].size(), 2u);
  EXPECT_EQ(json["features"][0]["geometry"]["coordinates"].size(), 5u);
}
