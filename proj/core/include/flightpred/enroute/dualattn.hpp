#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flightpred/data/plans.hpp"
#include "flightpred/enroute/kinematics.hpp"
#include "flightpred/enroute/weather.hpp"
#include "flightpred/nn/checkpoint.hpp"
#include "flightpred/nn/layers.hpp"
#include "flightpred/nn/optim.hpp"

namespace flightpred::enroute {

struct EnrouteConfig {
  std::size_t hidden = 256;        // encoder and decoder LSTMs
  std::size_t attn_dim = 32;       // d_e of both attention stages
  std::size_t weather_code = 8;    // k, CNN output width
  std::size_t plan_embed = 8;      // p, flight-plan embedding width
  std::size_t conv_channels = 8;
  std::size_t window = 16;         // weather window side, cells
  std::size_t t_obs = 18;
  /// false feeds all-zero weather windows (case C1).
  bool use_weather = true;
  double dt_s = 10.0;
  void validate() const;
};

/// lat, lon, alt, v_east, v_north, v_up, theta.
inline constexpr std::size_t kKinematicSeries = 7;
std::size_t driving_series_count(const EnrouteConfig& cfg);

struct EnrouteSample {
  std::string flight_id;
  std::vector<GeoPoint> observed;     // t_obs points, 10 s apart
  data::FlightPlan plan;
  std::vector<WeatherGrid> weather;   // one window per observed point
  std::vector<GeoPoint> target;       // following points; empty at inference
};

struct EnrouteNormalizer {
  std::array<double, kKinematicSeries> series_mean{};
  std::array<double, kKinematicSeries> series_std{1, 1, 1, 1, 1, 1, 1};
  std::array<double, 3> disp_mean{};            // dlat, dlon (deg), dalt (m)
  std::array<double, 3> disp_std{1, 1, 1};
  WeatherNormalizer weather;
};

EnrouteNormalizer fit_enroute_normalizer(const std::vector<EnrouteSample>& samples, double dt_s = 10.0);

/// W_cnn: three 3x3 stride-2 padding-1 ReLU convolutions, then a dense layer.
struct ConvStack {
  nn::Tensor k1, b1, k2, b2, k3, b3;
  nn::Tensor dense_w, dense_b;
};

/// Feature map after the third convolution, [C, h, w].
nn::Tensor conv_feature_map(const nn::Tensor& grid, const ConvStack& w);
/// Weather code C_t = dense(flatten(conv_feature_map(grid))). `grid` is [7, H, W].
nn::Tensor encode_weather(const nn::Tensor& grid, const ConvStack& w);
/// Side of the final feature map for a window of `side` cells.
std::size_t conv_output_side(std::size_t side);

/// alpha over the n driving series; key k is the observed history of series k.
nn::Tensor input_attention(const nn::Tensor& h_e, const std::vector<nn::Tensor>& series_history,
                           const nn::Tensor& w_query, const nn::Tensor& w_key);
/// beta over encoder states and c_t = sum beta_t h_e^t.
nn::AttentionResult temporal_attention(const std::vector<nn::Tensor>& encoder_states, const nn::Tensor& h_d,
                                       const nn::Tensor& w_query, const nn::Tensor& w_key);

struct DualAttnWeights {
  ConvStack cnn;
  nn::Tensor plan_w, plan_b;        // W_e
  nn::Tensor in_query, in_key;      // input attention
  nn::LstmWeights encoder;
  nn::Tensor tmp_query, tmp_key;    // temporal attention
  nn::LstmWeights decoder;
  nn::Tensor out_w, out_b;          // [3, 2H] displacement head
};

class DualAttnModel {
 public:
  DualAttnModel(EnrouteConfig cfg, EnrouteNormalizer norm, std::uint64_t seed);

  static DualAttnModel from_checkpoint(const nn::Checkpoint& ck);
  static DualAttnModel load(const std::string& path);
  void save(const std::string& path) const;
  std::string encode() const;

  const EnrouteConfig& config() const { return cfg_; }
  const EnrouteNormalizer& normalizer() const { return norm_; }
  std::uint64_t seed() const { return seed_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  DualAttnWeights weights() const;
  DualAttnWeights frozen_weights() const;
  /// Binds externally owned tensors given in parameter order (gradient checks).
  DualAttnWeights bind_tensors(const std::vector<nn::Tensor>& ordered) const;

  /// Normalized [7, window, window] CNN input; zeros when use_weather is off.
  nn::Tensor weather_input(const WeatherGrid& window) const;

 private:
  EnrouteConfig cfg_;
  EnrouteNormalizer norm_;
  std::uint64_t seed_ = 0;
  nn::ParameterSet params_;
};

struct EnrouteForward {
  std::vector<nn::Tensor> positions;            // offsets from the last observation, per decoded step
  std::vector<std::vector<double>> alpha;       // per encoder step
  std::vector<std::vector<double>> beta;        // per decoder step
};

/// Encoder over the observed window, then `horizon` decoder steps. With
/// teacher forcing the decoder reads the true previous displacement; the
/// emitted positions are always integrated from the last observation.
EnrouteForward run_dual_attention(const DualAttnModel& model, const DualAttnWeights& w, const EnrouteSample& s,
                                  std::size_t horizon, bool teacher_forcing);

/// LVA over the sample's target. The teacher-forced decoder reads true previous
/// displacements; otherwise it reads its own.
nn::Tensor enroute_loss(const DualAttnModel& model, const DualAttnWeights& w, const EnrouteSample& s,
                        const LvaWeights& lva = {}, bool teacher_forcing = true);

struct EnrouteTrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 8;
  nn::AdamConfig adam{};
  double clip_norm = 0.0;  // <= 0 disables clipping
  std::uint64_t seed = 0;
  LvaWeights lva{};
  bool teacher_forcing = true;
  std::function<void(std::size_t epoch, double train_loss, double val_loss)> on_epoch;
};

struct EnrouteCurves {
  std::vector<double> train_loss;  // mean per sample after each epoch
  std::vector<double> val_loss;    // NaN when no validation set
  double initial_train_loss = 0.0;
};

/// Adam on the LVA loss; batches of whole samples in a seeded order. Throws
/// NumericError with the epoch and sample index on divergence.
EnrouteCurves train_enroute(DualAttnModel& model, const std::vector<EnrouteSample>& train,
                            const std::vector<EnrouteSample>& val, const EnrouteTrainConfig& cfg);

double mean_enroute_loss(const DualAttnModel& model, const std::vector<EnrouteSample>& samples,
                         const LvaWeights& lva = {}, bool teacher_forcing = true);

/// Autoregressive decode of `horizon` points. Throws InvalidArgument for horizon 0.
std::vector<GeoPoint> predict_enroute(const DualAttnModel& model, const EnrouteSample& s, std::size_t horizon);

}  // namespace flightpred::enroute
