#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "flightpred/error.hpp"
#include "flightpred/nn/checkpoint.hpp"
#include "flightpred/nn/optim.hpp"
#include "flightpred/nn/parameters.hpp"

using namespace flightpred;
using namespace flightpred::nn;

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  std::vector<Tensor> params{Tensor::vector({1.0, -2.0, 3.0}, true)};
  std::vector<std::vector<double>> grads{{0.0, 0.0, 0.0}};
  AdamState state;
  adam_step(params, grads, state, {});
  EXPECT_EQ(params[0].to_vector(), (std::vector<double>{1.0, -2.0, 3.0}));
}

TEST(Adam, FirstStepIsLrTimesSign) {
  std::vector<Tensor> params{Tensor::vector({0.0, 0.0, 0.0}, true)};
  std::vector<std::vector<double>> grads{{0.3, -7.0, 1e-3}};
  AdamState state;
  AdamConfig cfg;
  adam_step(params, grads, state, cfg);
  // m_hat = g, v_hat = g^2 -> step = lr * g / (|g| + eps).
  EXPECT_NEAR(params[0][0], -cfg.lr * 0.3 / (0.3 + cfg.eps), 1e-15);
  EXPECT_NEAR(params[0][1], cfg.lr, 1e-9);
  EXPECT_NEAR(params[0][2], -cfg.lr, 1e-7);
}

TEST(Adam, GroupsAreIsolated) {
  std::vector<Tensor> both{Tensor::vector({1.0}, true), Tensor::vector({1.0}, true)};
  std::vector<Tensor> alone{Tensor::vector({1.0}, true)};
  AdamState s_both, s_alone;
  for (int k = 0; k < 5; ++k) {
    std::vector<std::vector<double>> g_both{{0.5 * (k + 1)}, {-3.0}};
    std::vector<std::vector<double>> g_alone{{0.5 * (k + 1)}};
    adam_step(both, g_both, s_both, {});
    adam_step(alone, g_alone, s_alone, {});
  }
  EXPECT_EQ(both[0][0], alone[0][0]);
}

TEST(Adam, ShapeMismatchThrows) {
  std::vector<Tensor> params{Tensor::vector({1.0, 2.0}, true)};
  std::vector<std::vector<double>> grads{{1.0}};
  AdamState state;
  EXPECT_THROW(adam_step(params, grads, state, {}), InvalidArgument);
}

TEST(ClipGradNorm, RescalesToMaxNorm) {
  ParameterSet ps;
  Tensor& a = ps.add("a", {2});
  a.mutable_grad()[0] = 3.0;
  a.mutable_grad()[1] = 4.0;
  Tensor& b = ps.add("b", {1});
  b.mutable_grad()[0] = 12.0;
  EXPECT_NEAR(clip_grad_norm(ps, 5.0), 13.0, 1e-12);
  EXPECT_NEAR(global_grad_norm(ps), 5.0, 1e-12);
  EXPECT_NEAR(ps.at("b").grad()[0], 12.0 * 5.0 / 13.0, 1e-12);
}

TEST(Parameters, UniformFanInBounds) {
  ParameterSet ps;
  Rng rng(0);
  Tensor& w = ps.add_uniform("w", {10, 25}, rng);
  for (double v : w.values()) EXPECT_LE(std::abs(v), 0.2);
  EXPECT_EQ(ps.parameter_count(), 250u);
  EXPECT_THROW(ps.add("w", {1}), InvalidArgument);
}

namespace {

ParameterSet sample_params(std::uint64_t seed) {
  ParameterSet ps;
  Rng rng(seed);
  ps.add_uniform("layer.W", {3, 4}, rng);
  ps.add("layer.b", {3});
  ps.add_uniform("conv.K", {2, 1, 3, 3}, rng);
  return ps;
}

}  // namespace

TEST(Checkpoint, ByteExactRoundTrip) {
  ParameterSet ps = sample_params(3);
  ps.at("layer.b").mutable_values()[1] = -0.0;
  ps.at("layer.b").mutable_values()[2] = 1e-310;
  CheckpointMeta meta;
  meta.seed = 42;
  meta.hyperparameters["hidden"] = 64;
  meta.tags["model"] = "test";
  const std::string bytes = encode_checkpoint(ps, meta);
  ASSERT_EQ(bytes.rfind("PCKPT1\n", 0), 0u);
  Checkpoint ck = decode_checkpoint(bytes);
  EXPECT_EQ(ck.meta.seed, 42u);
  EXPECT_EQ(ck.meta.tags.at("model"), "test");
  EXPECT_EQ(encode_checkpoint(ck.params, ck.meta), bytes);

  const auto path = std::filesystem::temp_directory_path() / "flightpred_ckpt_roundtrip.bin";
  save_checkpoint(path, ps, meta);
  Checkpoint loaded = load_checkpoint(path);
  EXPECT_EQ(encode_checkpoint(loaded.params, loaded.meta), bytes);
  std::filesystem::remove(path);
}

TEST(Checkpoint, SameSeedSameBytes) {
  EXPECT_EQ(encode_checkpoint(sample_params(9), {}), encode_checkpoint(sample_params(9), {}));
  EXPECT_NE(encode_checkpoint(sample_params(9), {}), encode_checkpoint(sample_params(10), {}));
}

TEST(Checkpoint, CorruptInputRejected) {
  EXPECT_THROW(decode_checkpoint("NOTCKPT"), DataError);
  std::string bytes = encode_checkpoint(sample_params(1), {});
  bytes.pop_back();
  EXPECT_THROW(decode_checkpoint(bytes), DataError);
}

TEST(Checkpoint, AssignParametersChecksShapes) {
  ParameterSet target = sample_params(1);
  ParameterSet source = sample_params(2);
  assign_parameters(target, source);
  EXPECT_EQ(target.at("layer.W").to_vector(), source.at("layer.W").to_vector());
  ParameterSet wrong;
  wrong.add("layer.W", {4, 3});
  EXPECT_THROW(assign_parameters(target, wrong), Error);
}
