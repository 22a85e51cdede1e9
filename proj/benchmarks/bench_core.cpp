#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "flightpred/constraints/constraints.hpp"
#include "flightpred/enroute/dualattn.hpp"
#include "flightpred/enroute/synthetic.hpp"
#include "flightpred/nn/gaussian.hpp"
#include "flightpred/nn/layers.hpp"
#include "flightpred/nn/ops.hpp"
#include "flightpred/phase/fuzzy.hpp"

using namespace flightpred;
using nn::Tensor;

namespace {

Tensor uniform(nn::Shape shape, std::mt19937_64& rng, double scale = 0.5) {
  Tensor t = Tensor::zeros(shape, true);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.mutable_values()) v = u(rng);
  return t;
}

void BM_LstmSequence(benchmark::State& state) {
  const auto H = static_cast<std::size_t>(state.range(0));
  const std::size_t I = 32, T = 20;
  std::mt19937_64 rng(1);
  nn::LstmWeights w{uniform({4 * H, I + H}, rng, 0.1), uniform({4 * H}, rng, 0.1)};
  std::vector<Tensor> xs;
  for (std::size_t t = 0; t < T; ++t) xs.push_back(uniform({I}, rng));
  for (auto _ : state) {
    nn::LstmState s{Tensor::zeros({H}), Tensor::zeros({H})};
    for (const auto& x : xs) s = nn::lstm_cell_step(x, s, w);
    Tensor loss = nn::sum(nn::square(s.h));
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T));
}
BENCHMARK(BM_LstmSequence)->Arg(32)->Arg(64)->Arg(128);

void BM_Conv2dForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  Tensor in = uniform({3, 32, 32}, rng);
  Tensor k = uniform({8, 3, 3, 3}, rng, 0.2);
  Tensor b = uniform({8}, rng, 0.1);
  for (auto _ : state) {
    Tensor loss = nn::sum(nn::square(nn::relu(nn::conv2d(in, k, b, 1, 1))));
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_Conv2dForwardBackward);

void BM_GaussianNll(benchmark::State& state) {
  std::mt19937_64 rng(3);
  Tensor raw = uniform({9}, rng, 0.8);
  const double target[3] = {0.1, -0.2, 0.3};
  for (auto _ : state) {
    Tensor nll = nn::gaussian3_nll(std::span<const double, 3>(target), nn::gaussian3_from_raw(raw));
    nll.backward();
    benchmark::DoNotOptimize(nll.item());
  }
}
BENCHMARK(BM_GaussianNll);

void BM_ClassifyPoint(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alt(0, 40000), spd(0, 500), roc(-4000, 4000);
  std::vector<std::array<double, 3>> pts(1024);
  for (auto& p : pts) p = {alt(rng), spd(rng), roc(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = pts[i++ & 1023];
    benchmark::DoNotOptimize(phase::classify_point(p[0], p[1], p[2]));
  }
}
BENCHMARK(BM_ClassifyPoint);

void BM_ConstrainedInferStep(benchmark::State& state) {
  // Mean sits on the climb limit, so roughly half the draws are rejected.
  constraints::ConstraintSet cs;
  const GeoPoint prev{40.0, -74.0, 1000.0};
  const GeoPoint ahead = destination(prev, 90.0, 1000.0);
  nn::GaussianParams3 dist;
  dist.mu = {ahead.lat, ahead.lon, prev.alt + 1000.0 * std::tan(15.0 * 3.14159265358979 / 180.0)};
  dist.sigma = {1e-3, 1e-3, 30.0};
  nn::Rng rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(constraints::infer_step(dist, prev, 90.0, phase::Phase::takeoff, cs, 10.0, rng));
}
BENCHMARK(BM_ConstrainedInferStep);

void BM_EnrouteLoss(benchmark::State& state) {
  enroute::EnrouteScenarioConfig sc;
  sc.count = 1;
  sc.seed = 6;
  const auto sample = enroute::make_enroute_sample(enroute::gen_enroute_scenarios(sc)[0], sc.t_obs, 16);
  enroute::EnrouteConfig c;
  c.hidden = static_cast<std::size_t>(state.range(0));
  c.window = 16;
  c.t_obs = sc.t_obs;
  enroute::DualAttnModel m(c, enroute::fit_enroute_normalizer({sample}), 7);
  for (auto _ : state) {
    Tensor loss = enroute::enroute_loss(m, m.weights(), sample, {}, false);
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_EnrouteLoss)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
