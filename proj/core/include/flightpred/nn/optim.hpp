#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flightpred/nn/parameters.hpp"

namespace flightpred::nn {

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates for one parameter tensor.
struct AdamMoments {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamState {
  std::vector<AdamMoments> moments;  // one entry per parameter, in order
  std::int64_t step = 0;
};

/// One bias-corrected Adam update over parallel lists of parameters and gradients.
/// Parameters without a gradient are treated as having a zero gradient.
void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               const AdamConfig& cfg);

/// Convenience wrapper over a ParameterSet using each tensor's accumulated gradient.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  void step(ParameterSet& params);
  const AdamState& state() const { return state_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  AdamState state_;
};

/// L2 norm over all accumulated gradients.
double global_grad_norm(const ParameterSet& params);
/// Rescales all gradients so their global norm is at most `max_norm`. Returns the pre-clip norm.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace flightpred::nn
