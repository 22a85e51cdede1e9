#include "flightpred/enroute/dualattn.hpp"

#include <cmath>
#include <limits>

#include "flightpred/error.hpp"
#include "flightpred/nn/ops.hpp"
#include "flightpred/textio.hpp"

namespace flightpred::enroute {

using nn::Tensor;

void EnrouteConfig::validate() const {
  if (hidden == 0 || attn_dim == 0 || weather_code == 0 || plan_embed == 0 || conv_channels == 0) {
    throw InvalidArgument("enroute config: layer widths must be positive");
  }
  if (window < 3) throw InvalidArgument("enroute config: weather window must be at least 3x3");
  if (t_obs < 2) throw InvalidArgument("enroute config: t_obs must be >= 2");
  if (!(dt_s > 0.0)) throw InvalidArgument("enroute config: dt must be positive");
}

std::size_t driving_series_count(const EnrouteConfig& cfg) {
  return kKinematicSeries + cfg.weather_code + cfg.plan_embed;
}

namespace {

constexpr std::size_t kPlanInputs = 2 * data::kPlanLength;

double stable_std(double sd, double mean) { return sd > 1e-9 * std::max(1.0, std::abs(mean)) ? sd : 1.0; }

std::array<double, 3> displacement(const GeoPoint& a, const GeoPoint& b) {
  return {b.lat - a.lat, wrap_angle_deg(b.lon - a.lon), b.alt - a.alt};
}

// Raw kinematic series per observed point; point 0 reuses the first step's V and theta.
std::vector<std::array<double, kKinematicSeries>> kinematic_rows(const std::vector<GeoPoint>& obs, double dt) {
  const auto kin = derive_kinematics(obs, dt);
  std::vector<std::array<double, kKinematicSeries>> rows;
  rows.reserve(obs.size());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const auto& k = kin[t == 0 ? 0 : t - 1];
    rows.push_back({obs[t].lat, obs[t].lon, obs[t].alt, k.v[0], k.v[1], k.v[2], k.theta_deg});
  }
  return rows;
}

struct Moments {
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  void add(double v) {
    s += v;
    s2 += v * v;
    ++n;
  }
  double mean() const { return n ? s / static_cast<double>(n) : 0.0; }
  double std() const {
    if (n == 0) return 1.0;
    const double m = mean();
    return stable_std(std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - m * m)), m);
  }
};

DualAttnWeights bind(const nn::ParameterSet& p, bool frozen) {
  auto get = [&](const std::string& name) {
    const Tensor& t = p.at(name);
    return frozen ? t.detach() : t;
  };
  DualAttnWeights w;
  w.cnn = {get("cnn.conv1.W"), get("cnn.conv1.b"), get("cnn.conv2.W"), get("cnn.conv2.b"), get("cnn.conv3.W"),
           get("cnn.conv3.b"), get("cnn.dense.W"), get("cnn.dense.b")};
  w.plan_w = get("plan.W");
  w.plan_b = get("plan.b");
  w.in_query = get("input_attention.query.W");
  w.in_key = get("input_attention.key.W");
  w.encoder = {get("encoder.W"), get("encoder.b")};
  w.tmp_query = get("temporal_attention.query.W");
  w.tmp_key = get("temporal_attention.key.W");
  w.decoder = {get("decoder.W"), get("decoder.b")};
  w.out_w = get("output.W");
  w.out_b = get("output.b");
  return w;
}

double get_hp(const std::map<std::string, double>& hp, const std::string& key) {
  auto it = hp.find(key);
  if (it == hp.end()) throw DataError("enroute checkpoint: missing hyperparameter " + key);
  return it->second;
}

}  // namespace

EnrouteNormalizer fit_enroute_normalizer(const std::vector<EnrouteSample>& samples, double dt_s) {
  if (samples.empty()) throw InvalidArgument("fit_enroute_normalizer: no samples");
  std::array<Moments, kKinematicSeries> series;
  std::array<Moments, 3> disp;
  std::vector<const WeatherGrid*> grids;
  for (const auto& s : samples) {
    for (const auto& row : kinematic_rows(s.observed, dt_s)) {
      for (std::size_t i = 0; i < kKinematicSeries; ++i) series[i].add(row[i]);
    }
    std::vector<GeoPoint> all = s.observed;
    all.insert(all.end(), s.target.begin(), s.target.end());
    for (std::size_t i = 1; i < all.size(); ++i) {
      const auto d = displacement(all[i - 1], all[i]);
      for (int c = 0; c < 3; ++c) disp[c].add(d[c]);
    }
    for (const auto& g : s.weather) grids.push_back(&g);
  }
  EnrouteNormalizer n;
  for (std::size_t i = 0; i < kKinematicSeries; ++i) {
    n.series_mean[i] = series[i].mean();
    n.series_std[i] = series[i].std();
  }
  for (int c = 0; c < 3; ++c) {
    n.disp_mean[c] = disp[c].mean();
    n.disp_std[c] = disp[c].std();
  }
  n.weather = fit_weather_normalizer(grids);
  return n;
}

std::size_t conv_output_side(std::size_t side) {
  for (int i = 0; i < 3; ++i) side = nn::conv2d_output_size(side, 3, 2, 1);
  return side;
}

Tensor conv_feature_map(const Tensor& grid, const ConvStack& w) {
  if (grid.rank() != 3 || grid.dim(1) < 3 || grid.dim(2) < 3) {
    throw InvalidArgument("encode_weather: grid must be [C, H, W] with H, W >= 3");
  }
  Tensor x = nn::relu(nn::conv2d(grid, w.k1, w.b1, 2, 1));
  x = nn::relu(nn::conv2d(x, w.k2, w.b2, 2, 1));
  return nn::relu(nn::conv2d(x, w.k3, w.b3, 2, 1));
}

Tensor encode_weather(const Tensor& grid, const ConvStack& w) {
  const Tensor fmap = conv_feature_map(grid, w);
  if (fmap.size() != w.dense_w.dim(1)) throw InvalidArgument("encode_weather: grid size does not match the dense layer");
  return nn::linear(w.dense_w, nn::reshape(fmap, nn::Shape{fmap.size()}), w.dense_b);
}

Tensor input_attention(const Tensor& h_e, const std::vector<Tensor>& series_history, const Tensor& w_query,
                       const Tensor& w_key) {
  if (series_history.empty()) throw InvalidArgument("input_attention: no series");
  std::vector<Tensor> keys;
  keys.reserve(series_history.size());
  for (const auto& s : series_history) keys.push_back(nn::matvec(w_key, s));
  return nn::scaled_dot_weights(nn::matvec(w_query, h_e), nn::stack(keys));
}

nn::AttentionResult temporal_attention(const std::vector<Tensor>& encoder_states, const Tensor& h_d,
                                       const Tensor& w_query, const Tensor& w_key) {
  return nn::scaled_dot_attention(h_d, encoder_states, w_query, w_key);
}

DualAttnModel::DualAttnModel(EnrouteConfig cfg, EnrouteNormalizer norm, std::uint64_t seed)
    : cfg_(cfg), norm_(norm), seed_(seed) {
  cfg_.validate();
  nn::Rng rng(seed);
  const std::size_t C = cfg_.conv_channels, H = cfg_.hidden, side = conv_output_side(cfg_.window);
  params_.add_uniform("cnn.conv1.W", nn::Shape{C, kWeatherChannels, 3, 3}, rng);
  params_.add("cnn.conv1.b", nn::Shape{C});
  params_.add_uniform("cnn.conv2.W", nn::Shape{C, C, 3, 3}, rng);
  params_.add("cnn.conv2.b", nn::Shape{C});
  params_.add_uniform("cnn.conv3.W", nn::Shape{C, C, 3, 3}, rng);
  params_.add("cnn.conv3.b", nn::Shape{C});
  params_.add_uniform("cnn.dense.W", nn::Shape{cfg_.weather_code, C * side * side}, rng);
  params_.add("cnn.dense.b", nn::Shape{cfg_.weather_code});
  params_.add_uniform("plan.W", nn::Shape{cfg_.plan_embed, kPlanInputs}, rng);
  params_.add("plan.b", nn::Shape{cfg_.plan_embed});
  params_.add_uniform("input_attention.query.W", nn::Shape{cfg_.attn_dim, H}, rng);
  params_.add_uniform("input_attention.key.W", nn::Shape{cfg_.attn_dim, cfg_.t_obs}, rng);
  nn::LstmWeights::create(params_, "encoder", driving_series_count(cfg_), H, rng);
  params_.add_uniform("temporal_attention.query.W", nn::Shape{cfg_.attn_dim, H}, rng);
  params_.add_uniform("temporal_attention.key.W", nn::Shape{cfg_.attn_dim, H}, rng);
  nn::LstmWeights::create(params_, "decoder", 3 + H, H, rng);
  params_.add_uniform("output.W", nn::Shape{3, 2 * H}, rng);
  params_.add("output.b", nn::Shape{3});
}

DualAttnWeights DualAttnModel::weights() const { return bind(params_, false); }
DualAttnWeights DualAttnModel::frozen_weights() const { return bind(params_, true); }

DualAttnWeights DualAttnModel::bind_tensors(const std::vector<Tensor>& ordered) const {
  const auto& entries = params_.entries();
  if (ordered.size() != entries.size()) throw InvalidArgument("bind_tensors: expected one tensor per parameter");
  nn::ParameterSet view;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (ordered[i].shape() != entries[i].tensor.shape()) {
      throw InvalidArgument("bind_tensors: shape mismatch for " + entries[i].name);
    }
    view.entries().push_back({entries[i].name, ordered[i]});
  }
  return bind(view, false);
}

Tensor DualAttnModel::weather_input(const WeatherGrid& window) const {
  if (window.nx != cfg_.window || window.ny != cfg_.window) {
    throw InvalidArgument("weather window is " + std::to_string(window.nx) + "x" + std::to_string(window.ny) +
                          ", model expects " + std::to_string(cfg_.window));
  }
  const nn::Shape shape{kWeatherChannels, cfg_.window, cfg_.window};
  if (!cfg_.use_weather) return Tensor::zeros(shape);
  return Tensor::from(shape, norm_.weather.apply(window));
}

std::string DualAttnModel::encode() const {
  nn::CheckpointMeta meta;
  meta.seed = seed_;
  meta.tags["model"] = "dualattn";
  auto& hp = meta.hyperparameters;
  hp["hidden"] = static_cast<double>(cfg_.hidden);
  hp["attn_dim"] = static_cast<double>(cfg_.attn_dim);
  hp["weather_code"] = static_cast<double>(cfg_.weather_code);
  hp["plan_embed"] = static_cast<double>(cfg_.plan_embed);
  hp["conv_channels"] = static_cast<double>(cfg_.conv_channels);
  hp["window"] = static_cast<double>(cfg_.window);
  hp["t_obs"] = static_cast<double>(cfg_.t_obs);
  hp["use_weather"] = cfg_.use_weather ? 1.0 : 0.0;
  hp["dt_s"] = cfg_.dt_s;
  for (std::size_t i = 0; i < kKinematicSeries; ++i) {
    hp["norm.series_mean." + std::to_string(i)] = norm_.series_mean[i];
    hp["norm.series_std." + std::to_string(i)] = norm_.series_std[i];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    hp["norm.disp_mean." + std::to_string(i)] = norm_.disp_mean[i];
    hp["norm.disp_std." + std::to_string(i)] = norm_.disp_std[i];
  }
  for (std::size_t i = 0; i < kWeatherChannels; ++i) {
    hp["norm.weather_mean." + std::to_string(i)] = norm_.weather.mean[i];
    hp["norm.weather_std." + std::to_string(i)] = norm_.weather.std[i];
  }
  return nn::encode_checkpoint(params_, meta);
}

void DualAttnModel::save(const std::string& path) const { textio::write_file(path, encode()); }

DualAttnModel DualAttnModel::from_checkpoint(const nn::Checkpoint& ck) {
  auto tag = ck.meta.tags.find("model");
  if (tag == ck.meta.tags.end() || tag->second != "dualattn") {
    throw DataError("checkpoint does not hold an en-route dual-attention model");
  }
  const auto& hp = ck.meta.hyperparameters;
  auto size = [&](const std::string& k) { return static_cast<std::size_t>(get_hp(hp, k)); };
  EnrouteConfig cfg;
  cfg.hidden = size("hidden");
  cfg.attn_dim = size("attn_dim");
  cfg.weather_code = size("weather_code");
  cfg.plan_embed = size("plan_embed");
  cfg.conv_channels = size("conv_channels");
  cfg.window = size("window");
  cfg.t_obs = size("t_obs");
  cfg.use_weather = get_hp(hp, "use_weather") != 0.0;
  cfg.dt_s = get_hp(hp, "dt_s");
  EnrouteNormalizer n;
  for (std::size_t i = 0; i < kKinematicSeries; ++i) {
    n.series_mean[i] = get_hp(hp, "norm.series_mean." + std::to_string(i));
    n.series_std[i] = get_hp(hp, "norm.series_std." + std::to_string(i));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    n.disp_mean[i] = get_hp(hp, "norm.disp_mean." + std::to_string(i));
    n.disp_std[i] = get_hp(hp, "norm.disp_std." + std::to_string(i));
  }
  for (std::size_t i = 0; i < kWeatherChannels; ++i) {
    n.weather.mean[i] = get_hp(hp, "norm.weather_mean." + std::to_string(i));
    n.weather.std[i] = get_hp(hp, "norm.weather_std." + std::to_string(i));
  }
  DualAttnModel m(cfg, n, ck.meta.seed);
  try {
    nn::assign_parameters(m.params_, ck.params);
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("enroute checkpoint: ") + e.what());
  }
  return m;
}

DualAttnModel DualAttnModel::load(const std::string& path) {
  return from_checkpoint(nn::decode_checkpoint(textio::read_file(path)));
}

EnrouteForward run_dual_attention(const DualAttnModel& model, const DualAttnWeights& w, const EnrouteSample& s,
                                  std::size_t horizon, bool teacher_forcing) {
  const auto& cfg = model.config();
  const auto& norm = model.normalizer();
  const std::size_t T = cfg.t_obs, n = driving_series_count(cfg);
  if (s.observed.size() != T) {
    throw InvalidArgument("en-route sample has " + std::to_string(s.observed.size()) + " observed points, model expects " +
                          std::to_string(T));
  }
  if (s.weather.size() != T) throw InvalidArgument("en-route sample needs one weather window per observed point");
  if (teacher_forcing && s.target.size() < horizon) throw InvalidArgument("teacher forcing needs the target track");

  std::vector<double> plan_in(kPlanInputs, 0.0);
  if (s.plan.real) {
    for (std::size_t i = 0; i < data::kPlanLength; ++i) {
      plan_in[2 * i] = (s.plan.waypoints[i].lat - norm.series_mean[0]) / norm.series_std[0];
      plan_in[2 * i + 1] = (s.plan.waypoints[i].lon - norm.series_mean[1]) / norm.series_std[1];
    }
  }
  const Tensor plan = nn::embed(Tensor::vector(plan_in), w.plan_w, w.plan_b);

  const auto rows = kinematic_rows(s.observed, cfg.dt_s);
  std::vector<Tensor> inputs;
  inputs.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> kin(kKinematicSeries);
    for (std::size_t i = 0; i < kKinematicSeries; ++i) kin[i] = (rows[t][i] - norm.series_mean[i]) / norm.series_std[i];
    const Tensor code = encode_weather(model.weather_input(s.weather[t]), w.cnn);
    inputs.push_back(nn::concat({Tensor::vector(kin), code, plan}));
  }

  // Key k is the history of series k over the window.
  const Tensor flat = nn::concat(std::span<const Tensor>(inputs));
  std::vector<Tensor> in_keys;
  in_keys.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> idx(T);
    for (std::size_t t = 0; t < T; ++t) idx[t] = t * n + k;
    in_keys.push_back(nn::matvec(w.in_key, nn::gather(flat, std::move(idx))));
  }
  const Tensor in_key_mat = nn::stack(in_keys);

  EnrouteForward out;
  nn::LstmState enc = nn::LstmState::zeros(cfg.hidden);
  std::vector<Tensor> enc_states, tmp_keys;
  enc_states.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Tensor alpha = nn::scaled_dot_weights(nn::matvec(w.in_query, enc.h), in_key_mat);
    out.alpha.emplace_back(alpha.values().begin(), alpha.values().end());
    enc = nn::lstm_cell_step(nn::mul(alpha, inputs[t]), enc, w.encoder);
    enc_states.push_back(enc.h);
    tmp_keys.push_back(nn::matvec(w.tmp_key, enc.h));
  }
  const Tensor enc_mat = nn::stack(enc_states);
  const Tensor tmp_key_mat = nn::stack(tmp_keys);

  const std::vector<double> dstd(norm.disp_std.begin(), norm.disp_std.end());
  const std::vector<double> dmean(norm.disp_mean.begin(), norm.disp_mean.end());
  auto normalized_disp = [&](const GeoPoint& a, const GeoPoint& b) {
    const auto d = displacement(a, b);
    return Tensor::vector({(d[0] - dmean[0]) / dstd[0], (d[1] - dmean[1]) / dstd[1], (d[2] - dmean[2]) / dstd[2]});
  };

  nn::LstmState dec = enc;
  Tensor y_prev = normalized_disp(s.observed[T - 2], s.observed[T - 1]);
  Tensor pos = Tensor::zeros(nn::Shape{3});
  for (std::size_t tau = 0; tau < horizon; ++tau) {
    const Tensor beta = nn::scaled_dot_weights(nn::matvec(w.tmp_query, dec.h), tmp_key_mat);
    out.beta.emplace_back(beta.values().begin(), beta.values().end());
    const Tensor ctx = nn::matvec_transposed(enc_mat, beta);
    dec = nn::lstm_cell_step(nn::concat({y_prev, ctx}), dec, w.decoder);
    const Tensor d_hat = nn::linear(w.out_w, nn::concat({dec.h, ctx}), w.out_b);
    pos = nn::add(pos, nn::affine(d_hat, dstd, dmean));
    out.positions.push_back(pos);
    if (teacher_forcing) {
      y_prev = normalized_disp(tau == 0 ? s.observed.back() : s.target[tau - 1], s.target[tau]);
    } else {
      y_prev = d_hat;
    }
  }
  return out;
}

Tensor enroute_loss(const DualAttnModel& model, const DualAttnWeights& w, const EnrouteSample& s,
                    const LvaWeights& lva, bool teacher_forcing) {
  if (s.target.empty()) throw InvalidArgument("enroute_loss: sample has no target");
  const double dt = model.config().dt_s;
  const auto fwd = run_dual_attention(model, w, s, s.target.size(), teacher_forcing);
  std::vector<GeoPoint> truth_path{s.observed.back()};
  truth_path.insert(truth_path.end(), s.target.begin(), s.target.end());
  const double theta0 = derive_kinematics(s.observed, dt).back().theta_deg;
  const auto truth = derive_kinematics(truth_path, dt, theta0);
  std::vector<Tensor> prev{Tensor::zeros(nn::Shape{3})};
  for (std::size_t i = 0; i + 1 < fwd.positions.size(); ++i) prev.push_back(fwd.positions[i]);
  return lva_loss(s.observed.back(), prev, fwd.positions, truth, dt, lva);
}

double mean_enroute_loss(const DualAttnModel& model, const std::vector<EnrouteSample>& samples,
                         const LvaWeights& lva, bool teacher_forcing) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto w = model.frozen_weights();
  double total = 0.0;
  for (const auto& s : samples) total += enroute_loss(model, w, s, lva, teacher_forcing).item();
  return total / static_cast<double>(samples.size());
}

EnrouteCurves train_enroute(DualAttnModel& model, const std::vector<EnrouteSample>& train,
                            const std::vector<EnrouteSample>& val, const EnrouteTrainConfig& cfg) {
  if (train.empty()) throw InvalidArgument("train_enroute: empty training set");
  if (cfg.batch_size == 0) throw InvalidArgument("train_enroute: batch size must be positive");
  EnrouteCurves curves;
  curves.initial_train_loss = mean_enroute_loss(model, train, cfg.lva, cfg.teacher_forcing);
  nn::Adam adam(cfg.adam);
  nn::Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const DualAttnWeights w = model.weights();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      model.params().zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        Tensor loss = enroute_loss(model, w, train[order[k]], cfg.lva, cfg.teacher_forcing);
        if (!std::isfinite(loss.item())) {
          throw NumericError("en-route training diverged at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(order[k]) + " (" + train[order[k]].flight_id + ")");
        }
        nn::scale(loss, 1.0 / static_cast<double>(end - start)).backward();
      }
      if (cfg.clip_norm > 0.0) nn::clip_grad_norm(model.params(), cfg.clip_norm);
      adam.step(model.params());
    }
    curves.train_loss.push_back(mean_enroute_loss(model, train, cfg.lva, cfg.teacher_forcing));
    curves.val_loss.push_back(mean_enroute_loss(model, val, cfg.lva, cfg.teacher_forcing));
    if (!std::isfinite(curves.train_loss.back())) {
      throw NumericError("en-route training diverged at epoch " + std::to_string(epoch));
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, curves.train_loss.back(), curves.val_loss.back());
  }
  model.params().zero_grad();
  return curves;
}

std::vector<GeoPoint> predict_enroute(const DualAttnModel& model, const EnrouteSample& s, std::size_t horizon) {
  if (horizon == 0) throw InvalidArgument("predict_enroute: horizon must be >= 1");
  const auto fwd = run_dual_attention(model, model.frozen_weights(), s, horizon, false);
  std::vector<GeoPoint> out;
  out.reserve(horizon);
  for (const auto& p : fwd.positions) out.push_back(offset_to_point(s.observed.back(), p));
  return out;
}

}  // namespace flightpred::enroute
