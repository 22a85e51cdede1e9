#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/graph/stgraph.hpp"
#include "flightpred/nn/checkpoint.hpp"
#include "flightpred/nn/gaussian.hpp"
#include "flightpred/nn/layers.hpp"
#include "flightpred/nn/optim.hpp"
#include "flightpred/terminal/scene.hpp"

namespace flightpred::terminal {

struct StructuralConfig {
  std::size_t hidden = 256;    // d_h of every LSTM
  std::size_t embed = 64;      // embedding width
  std::size_t attn_dim = 64;   // d_e of the attention projections
  std::size_t weather_dim = 0; // node weather vector length, zero-filled when absent
  /// false builds the variant that feeds the temporal and summed spatial
  /// hidden states straight into the nodeLSTM.
  bool attention = true;
  double scene_radius_m = graph::kDefaultSceneRadiusM;
  void validate() const;
};

/// Per-dataset scaling of positions, one-step displacements and speed.
struct Normalizer {
  nn::Vec3 pos_mean{};
  nn::Vec3 pos_std{1.0, 1.0, 1.0};
  nn::Vec3 disp_mean{};
  nn::Vec3 disp_std{1.0, 1.0, 1.0};
  double speed_mean = 0.0;  // m/s, horizontal
  double speed_std = 1.0;

  nn::Vec3 position(const GeoPoint& p) const;
  nn::Vec3 displacement(const GeoPoint& from, const GeoPoint& to) const;
  /// Inverse of `displacement` applied from `from`.
  GeoPoint apply(const GeoPoint& from, const nn::Vec3& normalized) const;
};

/// Fits means and standard deviations over every node and consecutive pair.
Normalizer fit_normalizer(const std::vector<graph::STGraph>& graphs);

/// Spatial edge input: (distance / radius, sin bearing, cos bearing, dalt / 1 km).
inline constexpr std::size_t kEdgeFeatureDim = 4;
/// Temporal edge input: normalized displacement (3) and horizontal speed.
inline constexpr std::size_t kTemporalFeatureDim = 4;

/// Tensors of one parameter set, bound by name.
struct StructuralWeights {
  nn::Tensor spatial_embed_w, spatial_embed_b;
  nn::LstmWeights spatial_lstm;
  nn::Tensor temporal_embed_w, temporal_embed_b;
  nn::LstmWeights temporal_lstm;
  nn::Tensor attn_query, attn_key;          // W_vv, W_v (attention variant only)
  nn::Tensor attn_embed_w, attn_embed_b;    // W_attention^e (attention variant only)
  nn::Tensor node_embed_w, node_embed_b;
  nn::LstmWeights node_lstm;
  nn::Tensor out_w, out_b;                  // W_p
};

class StructuralModel {
 public:
  StructuralModel(StructuralConfig cfg, Normalizer norm, std::uint64_t seed);

  static StructuralModel from_checkpoint(const nn::Checkpoint& ck);
  static StructuralModel load(const std::string& path);
  void save(const std::string& path) const;
  std::string encode() const;

  const StructuralConfig& config() const { return cfg_; }
  const Normalizer& normalizer() const { return norm_; }
  std::uint64_t seed() const { return seed_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  /// Weights attached to the trainable leaves.
  StructuralWeights weights() const;
  /// Same values cut from the tape, for inference.
  StructuralWeights frozen_weights() const;
  /// Binds externally owned tensors given in parameter order (gradient checks).
  StructuralWeights bind_tensors(const std::vector<nn::Tensor>& ordered) const;

  std::vector<double> node_feature(const graph::NodeState& n) const;
  std::vector<double> spatial_feature(const GeoPoint& from, const GeoPoint& to) const;
  std::vector<double> temporal_feature(const GeoPoint* prev, const GeoPoint& cur) const;

 private:
  StructuralConfig cfg_;
  Normalizer norm_;
  std::uint64_t seed_ = 0;
  nn::ParameterSet params_;
};

/// Recurrent states keyed by edge/node identity. Spatial edges are directed:
/// key (v, u) is the edge as seen from v.
struct ModelStateBank {
  struct Entry {
    nn::LstmState state;
    long last_t = 0;
  };
  std::map<std::pair<graph::NodeId, graph::NodeId>, Entry> spatial;
  std::map<graph::NodeId, Entry> temporal;
  std::map<graph::NodeId, Entry> node;
};

struct FrameOutput {
  /// Distribution of the next normalized displacement per node.
  std::map<graph::NodeId, nn::GaussianHead> heads;
  /// Attention weights per node over its neighbours (ascending id); absent when m = 0.
  std::map<graph::NodeId, std::vector<std::pair<graph::NodeId, double>>> attention;
};

/// One step of the st-graph network on frame `t`. Frame t-1, when present,
/// feeds the temporal edges.
FrameOutput forward_frame(const StructuralModel& model, const StructuralWeights& w, const graph::STGraph& g,
                          std::size_t t, ModelStateBank& bank);

/// Teacher-forced sum of NLLs of the normalized displacements into frames
/// t_obs .. t_pred-1 (zero-based), over nodes present at both ends of a step.
nn::Tensor nll_sequence_loss(const StructuralModel& model, const StructuralWeights& w, const graph::STGraph& g,
                             std::size_t t_obs, std::size_t t_pred);

struct StructuralTrainConfig {
  std::size_t epochs = 30;
  nn::AdamConfig adam{};
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  std::size_t t_obs = 18;
  std::size_t t_pred = 48;
  std::function<void(std::size_t epoch, double train_loss, double val_loss)> on_epoch;
};

struct TrainCurves {
  std::vector<double> train_loss;  // mean per scene, after each epoch's updates
  std::vector<double> val_loss;    // empty entries are NaN when no validation set
  double initial_train_loss = 0.0;
};

/// Adam over scenes in a seeded order, one scene per step. Throws NumericError
/// with the epoch and scene index when the loss diverges.
TrainCurves train_structural(StructuralModel& model, const std::vector<graph::STGraph>& train,
                             const std::vector<graph::STGraph>& val, const StructuralTrainConfig& cfg);

/// Mean loss per scene with frozen weights.
double mean_loss(const StructuralModel& model, const std::vector<graph::STGraph>& graphs, std::size_t t_obs,
                 std::size_t t_pred);

struct RolloutOptions {
  std::size_t horizon = 30;
  /// Gate takeoff/approach nodes through rejection sampling when set.
  std::optional<constraints::ConstraintSet> constraints;
  /// false emits the mean displacement instead of a sample.
  bool sample = true;
};

struct StepPrediction {
  long t = 0;                 // frame index
  nn::GaussianParams3 dist;   // absolute (lat, lon, alt m)
  GeoPoint point;             // emitted position
  bool passed = true;         // false when the gate fell back to the least-violating draw
  int draws = 1;
};

struct TrajectoryPrediction {
  std::map<graph::NodeId, std::vector<StepPrediction>> nodes;
  std::vector<std::string> flight_ids;
  std::size_t fallbacks = 0;
};

/// Closed-loop rollout from the last observed frame of `observed`. Emitted
/// points replace positions in the node and edge features of later steps.
TrajectoryPrediction rollout(const StructuralModel& model, const Scene& observed, const RolloutOptions& opts,
                             nn::Rng& rng);

/// node_id,flight_id,t,mu_lat,mu_lon,mu_alt,sigma_lat,sigma_lon,sigma_alt,rho_xy,rho_xz,rho_yz,lat,lon,alt,passed
void write_prediction_csv(std::ostream& os, const TrajectoryPrediction& pred);
/// FeatureCollection with one LineString ([lon, lat, alt]) per node.
std::string prediction_geojson(const TrajectoryPrediction& pred);

}  // namespace flightpred::terminal
