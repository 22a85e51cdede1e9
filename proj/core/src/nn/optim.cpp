#include "flightpred/nn/optim.hpp"

#include <cmath>

#include "flightpred/error.hpp"

namespace flightpred::nn {

void adam_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw InvalidArgument("adam_step: parameter/gradient count mismatch");
  if (state.moments.empty()) {
    state.moments.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.moments[i].m.assign(params[i].size(), 0.0);
      state.moments[i].v.assign(params[i].size(), 0.0);
    }
  }
  if (state.moments.size() != params.size()) throw InvalidArgument("adam_step: state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].empty() && grads[i].size() != params[i].size()) {
      throw InvalidArgument("adam_step: gradient shape mismatch");
    }
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].mutable_values();
    auto& mom = state.moments[i];
    const auto& g = grads[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double gk = g.empty() ? 0.0 : g[k];
      mom.m[k] = cfg.beta1 * mom.m[k] + (1.0 - cfg.beta1) * gk;
      mom.v[k] = cfg.beta2 * mom.v[k] + (1.0 - cfg.beta2) * gk * gk;
      const double m_hat = mom.m[k] / bc1;
      const double v_hat = mom.v[k] / bc2;
      values[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void Adam::step(ParameterSet& params) {
  std::vector<Tensor> tensors;
  std::vector<std::vector<double>> grads;
  tensors.reserve(params.entries().size());
  grads.reserve(params.entries().size());
  for (auto& e : params.entries()) {
    tensors.push_back(e.tensor);
    auto g = e.tensor.grad();
    grads.emplace_back(g.begin(), g.end());
  }
  adam_step(tensors, grads, state_, cfg_);
}

double global_grad_norm(const ParameterSet& params) {
  double sq = 0.0;
  for (const auto& e : params.entries()) {
    for (double g : e.tensor.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& e : params.entries()) {
      if (!e.tensor.has_grad()) continue;
      for (double& g : e.tensor.mutable_grad()) g *= f;
    }
  }
  return norm;
}

}  // namespace flightpred::nn
