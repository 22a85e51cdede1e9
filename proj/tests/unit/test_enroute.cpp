#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/enroute/kinematics.hpp"
#include "flightpred/enroute/synthetic.hpp"
#include "flightpred/enroute/weather.hpp"
#include "flightpred/error.hpp"
#include "flightpred/eval/kalman.hpp"
#include "flightpred/eval/metrics.hpp"
#include "flightpred/nn/gradcheck.hpp"
#include "flightpred/nn/ops.hpp"

using namespace flightpred;
using namespace flightpred::enroute;
using nn::Tensor;

namespace {

WeatherGrid patterned_grid(std::size_t nx, std::size_t ny) {
  WeatherGrid g = WeatherGrid::zeros(nx, ny, 30.0, -85.0, 30.0 + 0.1 * (ny - 1), -85.0 + 0.1 * (nx - 1), 35000.0);
  for (std::size_t c = 0; c < kWeatherChannels; ++c)
    for (std::size_t r = 0; r < ny; ++r)
      for (std::size_t col = 0; col < nx; ++col)
        g.at(c, r, col) = static_cast<float>(std::sin(0.9 * c + 0.37 * r + 0.71 * col) * (1.0 + 0.1 * c));
  return g;
}

Tensor grid_tensor(const WeatherGrid& g) {
  std::vector<double> v(g.values.begin(), g.values.end());
  return Tensor::from(nn::Shape{kWeatherChannels, g.ny, g.nx}, v);
}

// Plain-loop conv stack: zero padding 1, stride 2, ReLU, then dense.
std::vector<double> conv_oracle(const std::vector<double>& in, std::size_t C, std::size_t side, const Tensor& k,
                                const Tensor& b, std::size_t& out_side) {
  const std::size_t O = k.dim(0);
  out_side = (side + 2 - 3) / 2 + 1;
  std::vector<double> out(O * out_side * out_side, 0.0);
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t y = 0; y < out_side; ++y)
      for (std::size_t x = 0; x < out_side; ++x) {
        double s = b[o];
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx) {
              const long iy = static_cast<long>(2 * y + dy) - 1, ix = static_cast<long>(2 * x + dx) - 1;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(side) || ix >= static_cast<long>(side)) continue;
              s += k[((o * C + c) * 3 + dy) * 3 + dx] * in[(c * side + iy) * side + ix];
            }
        out[(o * out_side + y) * out_side + x] = std::max(0.0, s);
      }
  return out;
}

EnrouteConfig small_config() {
  EnrouteConfig c;
  c.hidden = 6;
  c.attn_dim = 3;
  c.weather_code = 2;
  c.plan_embed = 2;
  c.conv_channels = 2;
  c.window = 4;
  c.t_obs = 4;
  return c;
}

std::vector<EnrouteScenario> scenarios(std::size_t n, std::size_t t_obs, std::size_t horizon, std::uint64_t seed,
                                       double cell_probability = 0.8, double noise = 10.0) {
  EnrouteScenarioConfig sc;
  sc.count = n;
  sc.seed = seed;
  sc.t_obs = t_obs;
  sc.horizon = horizon;
  sc.cell_probability = cell_probability;
  sc.noise_m = noise;
  sc.alt_noise_m = noise > 0.0 ? 5.0 : 0.0;
  return gen_enroute_scenarios(sc);
}

std::vector<EnrouteSample> samples_of(const std::vector<EnrouteScenario>& scs, std::size_t t_obs, std::size_t window) {
  std::vector<EnrouteSample> out;
  for (const auto& s : scs) out.push_back(make_enroute_sample(s, t_obs, window));
  return out;
}

DualAttnModel small_model(const std::vector<EnrouteSample>& data, std::uint64_t seed, EnrouteConfig cfg = small_config()) {
  return DualAttnModel(cfg, fit_enroute_normalizer(data, cfg.dt_s), seed);
}

}  // namespace

// ---- weather grids ----

TEST(WeatherGrid, Wxg1RoundTripIsByteExact) {
  const WeatherGrid g = patterned_grid(5, 4);
  const std::string bytes = encode_wxg1(g);
  const WeatherGrid back = decode_wxg1(bytes);
  EXPECT_EQ(back, g);
  EXPECT_EQ(encode_wxg1(back), bytes);
  EXPECT_EQ(bytes.substr(0, 5), "WXG1\n");
  EXPECT_EQ(bytes.size(), bytes.find('\n', 5) + 1 + 4 * 7 * 5 * 4);
}

TEST(WeatherGrid, DecodeRejectsCorruptInput) {
  const std::string bytes = encode_wxg1(patterned_grid(3, 3));
  EXPECT_THROW(decode_wxg1("WXG2" + bytes.substr(4)), DataError);
  EXPECT_THROW(decode_wxg1(bytes.substr(0, bytes.size() - 1)), DataError);
  std::string renamed = bytes;
  renamed.replace(renamed.find("VVEL"), 4, "WWEL");
  EXPECT_THROW(decode_wxg1(renamed), DataError);
  EXPECT_THROW(decode_wxg1(""), DataError);
}

TEST(WeatherGrid, ValidateRejectsTinyAndNonFinite) {
  EXPECT_THROW(patterned_grid(2, 5).validate(), InvalidArgument);
  WeatherGrid g = patterned_grid(3, 3);
  EXPECT_NO_THROW(g.validate());
  g.at(kTMP, 1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(g.validate(), InvalidArgument);
}

TEST(WeatherGrid, WindowCentredAndClampedAtEdges) {
  const WeatherGrid g = patterned_grid(10, 10);
  const WeatherGrid w = extract_window(g, {g.lat_of(5), g.lon_of(5), 0.0}, 4);
  ASSERT_EQ(w.nx, 4u);
  // Window row 2 / col 2 is the nearest node for an even size.
  EXPECT_EQ(w.at(kRH, 2, 2), g.at(kRH, 5, 5));
  EXPECT_EQ(w.at(kRH, 0, 0), g.at(kRH, 3, 3));
  const WeatherGrid corner = extract_window(g, {g.lat_of(0), g.lon_of(0), 0.0}, 4);
  EXPECT_EQ(corner.at(kHGT, 0, 0), g.at(kHGT, 0, 0));
  EXPECT_EQ(corner.at(kHGT, 1, 1), g.at(kHGT, 0, 0));
}

// ---- conv stack ----

TEST(EncodeWeather, ZeroGridZeroBiasesGivesZero) {
  auto data = samples_of(scenarios(2, 18, 2, 1), 18, 16);
  EnrouteConfig cfg;
  cfg.hidden = 8;
  DualAttnModel m(cfg, fit_enroute_normalizer(data), 0);
  const Tensor code = encode_weather(Tensor::zeros(nn::Shape{7, 16, 16}), m.frozen_weights().cnn);
  ASSERT_EQ(code.size(), cfg.weather_code);
  for (double v : code.values()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeWeather, FeatureMapIsLocal) {
  auto data = samples_of(scenarios(2, 18, 2, 1), 18, 16);
  EnrouteConfig cfg;
  cfg.hidden = 8;
  DualAttnModel m(cfg, fit_enroute_normalizer(data), 0);
  auto w = m.frozen_weights();
  // Jitter biases so units are active.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.05, 0.3);
  for (Tensor* b : {&w.cnn.b1, &w.cnn.b2, &w.cnn.b3})
    for (double& v : b->mutable_values()) v = u(rng);
  const Tensor a = grid_tensor(patterned_grid(16, 16));
  WeatherGrid g2 = patterned_grid(16, 16);
  for (std::size_t c = 0; c < 7; ++c) g2.at(c, 15, 15) += 5.0f;
  const Tensor b = grid_tensor(g2);
  const Tensor fa = conv_feature_map(a, w.cnn), fb = conv_feature_map(b, w.cnn);
  ASSERT_EQ(fa.dim(1), conv_output_side(16));
  // Unit (0, 0) of the last map sees input rows/cols 0..14 only.
  for (std::size_t o = 0; o < fa.dim(0); ++o) EXPECT_EQ(fa[o * 4], fb[o * 4]);
  bool any_changed = false;
  for (std::size_t i = 0; i < fa.size(); ++i) any_changed |= fa[i] != fb[i];
  EXPECT_TRUE(any_changed);
}

TEST(EncodeWeather, MatchesScriptedOracle) {
  auto data = samples_of(scenarios(2, 18, 2, 1), 18, 16);
  EnrouteConfig cfg;
  cfg.hidden = 8;
  DualAttnModel m(cfg, fit_enroute_normalizer(data), 0);
  auto w = m.frozen_weights();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (Tensor* b : {&w.cnn.b1, &w.cnn.b2, &w.cnn.b3, &w.cnn.dense_b})
    for (double& v : b->mutable_values()) v = u(rng);
  const WeatherGrid g = patterned_grid(16, 16);
  const Tensor code = encode_weather(grid_tensor(g), w.cnn);

  std::vector<double> x(g.values.begin(), g.values.end());
  std::size_t side = 16, next = 0;
  x = conv_oracle(x, 7, side, w.cnn.k1, w.cnn.b1, next);
  side = next;
  x = conv_oracle(x, cfg.conv_channels, side, w.cnn.k2, w.cnn.b2, next);
  side = next;
  x = conv_oracle(x, cfg.conv_channels, side, w.cnn.k3, w.cnn.b3, next);
  ASSERT_EQ(x.size(), w.cnn.dense_w.dim(1));
  for (std::size_t i = 0; i < cfg.weather_code; ++i) {
    double s = w.cnn.dense_b[i];
    for (std::size_t j = 0; j < x.size(); ++j) s += w.cnn.dense_w[i * x.size() + j] * x[j];
    EXPECT_NEAR(code[i], s, 1e-9);
  }
}

TEST(EncodeWeather, RejectsTinyGrid) {
  ConvStack w;
  EXPECT_THROW(conv_feature_map(Tensor::zeros(nn::Shape{7, 2, 2}), w), InvalidArgument);
}

// ---- attention ----

TEST(InputAttention, IdenticalSeriesGiveUniformWeights) {
  const Tensor h = Tensor::vector({0.3, -0.2, 0.5});
  const Tensor wq = Tensor::from(nn::Shape{2, 3}, {0.1, 0.2, 0.3, -0.4, 0.5, 0.6});
  const Tensor wk = Tensor::from(nn::Shape{2, 4}, {0.7, -0.1, 0.2, 0.3, 0.5, 0.4, -0.3, 0.2});
  const Tensor s = Tensor::vector({1.0, 2.0, 3.0, 4.0});
  const Tensor a = input_attention(h, {s, s, s, s, s}, wq, wk);
  for (double v : a.values()) EXPECT_NEAR(v, 0.2, 1e-12);
  const Tensor one = input_attention(h, {s}, wq, wk);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0], 1.0);
}

TEST(InputAttention, LogNineGapGivesNinetyTen) {
  // Score = (m / sqrt(d_e)) q.k with m = 2, d_e = 1.
  const Tensor h = Tensor::vector({1.0});
  const Tensor eye = Tensor::from(nn::Shape{1, 1}, {1.0});
  const Tensor a = input_attention(h, {Tensor::vector({std::log(9.0) / 2.0}), Tensor::vector({0.0})}, eye, eye);
  EXPECT_NEAR(a[0], 0.9, 1e-12);
  EXPECT_NEAR(a[1], 0.1, 1e-12);
}

TEST(TemporalAttention, EqualStatesAndSingleState) {
  const Tensor st = Tensor::vector({0.4, -0.7, 0.1});
  const Tensor wq = Tensor::from(nn::Shape{2, 3}, {0.3, 0.1, -0.2, 0.5, 0.4, 0.2});
  const Tensor wk = Tensor::from(nn::Shape{2, 3}, {-0.1, 0.6, 0.2, 0.3, -0.5, 0.1});
  const Tensor hd = Tensor::vector({0.9, 0.2, -0.3});
  auto r = temporal_attention({st, st, st}, hd, wq, wk);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.context[i], st[i], 1e-12);
  auto one = temporal_attention({st}, hd, wq, wk);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(one.context[i], st[i]);
}

TEST(TemporalAttention, SpikeScoreSaturates) {
  // d_e = 1, identity projections on the first coordinate; m = 4.
  const Tensor wq = Tensor::from(nn::Shape{1, 2}, {1.0, 0.0});
  const Tensor wk = Tensor::from(nn::Shape{1, 2}, {1.0, 0.0});
  const Tensor hd = Tensor::vector({1.0, 0.0});
  std::vector<Tensor> states;
  for (int i = 0; i < 4; ++i) states.push_back(Tensor::vector({0.0, 1.0 + i}));
  states[2] = Tensor::vector({20.0 / 4.0, 7.0});  // score gap 20
  auto r = temporal_attention(states, hd, wq, wk);
  EXPECT_NEAR(r.context[0], states[2][0], 1e-6);
  EXPECT_NEAR(r.context[1], states[2][1], 1e-6);
  EXPECT_GT(r.weights[2], 1.0 - 1e-8);
}

// ---- kinematics and LVA ----

TEST(Kinematics, StationaryNorthAndEast) {
  const GeoPoint a{30.0, -85.0, 10000.0};
  auto still = derive_kinematics({a, a});
  EXPECT_EQ(still[0].v, (std::array<double, 3>{0.0, 0.0, 0.0}));

  auto north = derive_kinematics({a, destination(a, 0.0, 2000.0)});
  EXPECT_NEAR(north[0].theta_deg, 0.0, 1e-9);
  EXPECT_NEAR(north[0].v[1], 200.0, 1e-6);

  const GeoPoint b = destination(a, 90.0, 1000.0);
  ASSERT_NEAR(haversine(a, b), 1000.0, 1e-6);
  auto east = derive_kinematics({a, b}, 10.0);
  EXPECT_NEAR(std::hypot(east[0].v[0], east[0].v[1]), 100.0, 1e-6);
  EXPECT_NEAR(east[0].theta_deg, 90.0, 1e-9);
}

TEST(Kinematics, DuplicatePointCarriesTheta) {
  const GeoPoint a{30.0, -85.0, 10000.0};
  const GeoPoint b = destination(a, 45.0, 1000.0);
  auto k = derive_kinematics({a, b, b});
  EXPECT_EQ(k[1].v, (std::array<double, 3>{0.0, 0.0, 0.0}));
  EXPECT_NEAR(k[1].theta_deg, 45.0, 1e-9);
  EXPECT_THROW(derive_kinematics({a}), InvalidArgument);
}

TEST(Lva, HandCases) {
  const GeoPoint a{30.0, -85.0, 10000.0};
  std::vector<GeoPoint> track{a, destination(a, 90.0, 2400.0), destination(a, 90.0, 4800.0)};
  auto truth = derive_kinematics(track);
  EXPECT_EQ(lva_loss(truth, truth), 0.0);

  auto shifted = truth;
  for (auto& k : shifted) k.pos.alt += 100.0;
  EXPECT_NEAR(lva_loss(shifted, truth), 10000.0, 1e-9);

  auto turned = truth;
  turned[0].theta_deg = truth[0].theta_deg + 350.0;
  turned[1].theta_deg = truth[1].theta_deg + 350.0;
  EXPECT_NEAR(lva_loss(turned, truth), 100.0, 1e-9);

  auto shorter = truth;
  shorter.pop_back();
  EXPECT_THROW(lva_loss(shorter, truth), InvalidArgument);
}

TEST(Lva, TensorFormAgreesWithScalarForm) {
  const GeoPoint a{30.0, -85.0, 10000.0};
  std::vector<GeoPoint> truth_track{a};
  std::vector<GeoPoint> pred_track{a};
  for (int i = 1; i <= 4; ++i) {
    truth_track.push_back(destination(a, 88.0, 2300.0 * i));
    GeoPoint p = destination(a, 91.0 + i, 2250.0 * i);
    p.alt += 15.0 * i;
    pred_track.push_back(p);
  }
  const auto truth = derive_kinematics(truth_track, 10.0, 88.0);
  const auto pred = derive_kinematics(pred_track, 10.0, 88.0);
  const GeoPoint origin = pred_track[0];
  std::vector<Tensor> prev, cur;
  for (std::size_t i = 1; i < pred_track.size(); ++i) {
    prev.push_back(point_to_offset(origin, pred_track[i - 1]));
    cur.push_back(point_to_offset(origin, pred_track[i]));
  }
  const double expect = lva_loss(pred, truth);
  EXPECT_GT(expect, 0.0);
  EXPECT_NEAR(lva_loss(origin, prev, cur, truth, 10.0).item(), expect, 1e-9 * expect);
  const GeoPoint back = offset_to_point(origin, cur.back());
  EXPECT_NEAR(haversine(back, pred_track.back()), 0.0, 1e-6);
}

// ---- dual attention ----

TEST(DualAttn, AttentionWeightsSumToOne) {
  auto data = samples_of(scenarios(3, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 1);
  auto fwd = run_dual_attention(m, m.frozen_weights(), data[0], 3, false);
  ASSERT_EQ(fwd.alpha.size(), 4u);
  ASSERT_EQ(fwd.beta.size(), 3u);
  for (const auto& a : fwd.alpha) {
    EXPECT_EQ(a.size(), driving_series_count(m.config()));
    double s = 0.0;
    for (double v : a) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  for (const auto& b : fwd.beta) {
    double s = 0.0;
    for (double v : b) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(DualAttn, ZeroCnnMakesPredictionWeatherInvariant) {
  auto data = samples_of(scenarios(3, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 1);
  for (auto& e : m.params().entries())
    if (e.name.rfind("cnn.", 0) == 0)
      for (double& v : e.tensor.mutable_values()) v = 0.0;
  EnrouteSample other = data[0];
  for (auto& g : other.weather)
    for (auto& v : g.values) v *= 3.0f;
  EXPECT_EQ(predict_enroute(m, data[0], 3), predict_enroute(m, other, 3));
}

TEST(DualAttn, WeatherPerturbationChangesPrediction) {
  auto data = samples_of(scenarios(3, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 1);
  for (auto& e : m.params().entries())
    if (e.name == "cnn.conv1.b" || e.name == "cnn.conv2.b" || e.name == "cnn.conv3.b")
      for (double& v : e.tensor.mutable_values()) v = 0.1;
  EnrouteSample other = data[0];
  other.weather.back().at(kVVEL, 1, 1) -= 5.0f;
  EXPECT_NE(predict_enroute(m, data[0], 3), predict_enroute(m, other, 3));

  EnrouteConfig c1 = small_config();
  c1.use_weather = false;
  DualAttnModel blind = small_model(data, 1, c1);
  EXPECT_EQ(predict_enroute(blind, data[0], 3), predict_enroute(blind, other, 3));
}

TEST(DualAttn, EndToEndGradcheck) {
  auto data = samples_of(scenarios(2, 4, 4, 5), 4, 4);
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    for (bool tf : {true, false}) {
      DualAttnModel m = small_model(data, seed);
      std::mt19937_64 rng(seed + 50);
      std::uniform_real_distribution<double> jitter(-0.1, 0.1);
      for (auto& e : m.params().entries())
        for (double& v : e.tensor.mutable_values()) v += jitter(rng);
      std::vector<Tensor> inputs;
      for (const auto& e : m.params().entries()) inputs.push_back(e.tensor);
      auto fn = [&](const std::vector<Tensor>& v) { return enroute_loss(m, m.bind_tensors(v), data[0], {}, tf); };
      // Positions are km-scale and squared, so the loss carries ~1e-9 m^2 of roundoff.
      EXPECT_LT(nn::finite_diff_gradcheck(fn, inputs, std::vector<double>{1e-3, 3e-4, 1e-4}), 1e-4) << "seed " << seed << " tf " << tf;
    }
  }
}

TEST(DualAttn, CheckpointRoundTrip) {
  auto data = samples_of(scenarios(3, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 8);
  const std::string bytes = m.encode();
  DualAttnModel back = DualAttnModel::from_checkpoint(nn::decode_checkpoint(bytes));
  EXPECT_EQ(back.encode(), bytes);
  EXPECT_EQ(predict_enroute(back, data[1], 3), predict_enroute(m, data[1], 3));
}

TEST(DualAttn, RejectsMismatchedSamples) {
  auto data = samples_of(scenarios(2, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 0);
  EXPECT_THROW(predict_enroute(m, data[0], 0), InvalidArgument);
  EnrouteSample bad = data[0];
  bad.observed.pop_back();
  EXPECT_THROW(predict_enroute(m, bad, 2), InvalidArgument);
  EnrouteSample wide = samples_of(scenarios(1, 4, 3, 2), 4, 6)[0];
  EXPECT_THROW(predict_enroute(m, wide, 2), InvalidArgument);
}

TEST(DualAttn, HorizonOneAndDeterministic) {
  auto data = samples_of(scenarios(2, 4, 3, 2), 4, 4);
  DualAttnModel m = small_model(data, 0);
  EXPECT_EQ(predict_enroute(m, data[0], 1).size(), 1u);
  EnrouteSample blind = data[0];
  blind.target.clear();
  const auto a = predict_enroute(m, blind, 5);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(a, predict_enroute(m, blind, 5));
}

// ---- training ----

namespace {

EnrouteConfig train_config() {
  EnrouteConfig c = small_config();
  c.hidden = 12;
  c.attn_dim = 4;
  c.t_obs = 6;
  return c;
}

}  // namespace

TEST(EnrouteTrain, LossDropsOnStraightLines) {
  auto data = samples_of(scenarios(24, 6, 4, 11, 0.0, 0.0), 6, 4);
  DualAttnModel m = small_model(data, 3, train_config());
  EnrouteTrainConfig tc;
  tc.epochs = 100;
  tc.seed = 1;
  auto curves = train_enroute(m, data, {}, tc);
  ASSERT_EQ(curves.train_loss.size(), 100u);
  EXPECT_LT(curves.train_loss.back(), 0.05 * curves.initial_train_loss)
      << curves.initial_train_loss << " -> " << curves.train_loss.back();
}

TEST(EnrouteTrain, ZeroEpochsAndSameSeed) {
  auto data = samples_of(scenarios(6, 6, 3, 12), 6, 4);
  DualAttnModel m = small_model(data, 3, train_config());
  const std::string init = m.encode();
  EnrouteTrainConfig tc;
  tc.epochs = 0;
  train_enroute(m, data, {}, tc);
  EXPECT_EQ(m.encode(), init);

  tc.epochs = 2;
  tc.seed = 5;
  DualAttnModel a = small_model(data, 3, train_config()), b = small_model(data, 3, train_config());
  train_enroute(a, data, data, tc);
  train_enroute(b, data, data, tc);
  EXPECT_EQ(a.encode(), b.encode());
  EXPECT_NE(a.encode(), init);
  EXPECT_THROW(train_enroute(a, {}, {}, tc), InvalidArgument);
}

TEST(EnrouteTrain, BeatsConstantVelocityOnHeldOutStraightLines) {
  auto train = samples_of(scenarios(48, 6, 4, 21, 0.0, 30.0), 6, 4);
  auto test = samples_of(scenarios(20, 6, 4, 22, 0.0, 30.0), 6, 4);
  DualAttnModel m = small_model(train, 3, train_config());
  EnrouteTrainConfig tc;
  tc.epochs = 60;
  tc.seed = 2;
  tc.teacher_forcing = false;
  tc.adam.lr = 0.003;
  train_enroute(m, train, {}, tc);
  eval::MetricsAccumulator model("model"), cv("cv");
  for (const auto& s : test) {
    model.add(predict_enroute(m, s, s.target.size()), s.target);
    cv.add(eval::last_velocity_baseline(s.observed, s.target.size()), s.target);
  }
  EXPECT_LT(model.report().ade, cv.report().ade);
}

// ---- synthetic generator ----

TEST(EnrouteSynthetic, DeterministicAndDetourFollowsCell) {
  auto a = scenarios(5, 18, 30, 3), b = scenarios(5, 18, 30, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].track, b[i].track);
    EXPECT_EQ(encode_wxg1(a[i].field), encode_wxg1(b[i].field));
  }
  auto clear = scenarios(5, 18, 30, 3, 0.0);
  for (const auto& s : clear) EXPECT_EQ(s.detour_m, 0.0);
  auto sample = make_enroute_sample(a[0], 18, 16);
  EXPECT_EQ(sample.observed.size(), 18u);
  EXPECT_EQ(sample.target.size(), 30u);
  EXPECT_EQ(sample.weather.size(), 18u);
  EXPECT_TRUE(sample.plan.real);
  EXPECT_THROW(make_enroute_sample(a[0], 48, 16), InvalidArgument);
}
