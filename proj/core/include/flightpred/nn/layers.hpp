#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "flightpred/nn/parameters.hpp"
#include "flightpred/nn/tensor.hpp"

namespace flightpred::nn {

enum class Activation { none, relu, tanh, sigmoid };

/// y = act(W x + b).
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act);

/// ReLU embedding phi(x; W_e) = max(0, W_e x). A bias, when given, is added before the clamp.
Tensor embed(const Tensor& x, const Tensor& w_e);
Tensor embed(const Tensor& x, const Tensor& w_e, const Tensor& b_e);

struct Dense {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
  Activation activation = Activation::none;

  static Dense create(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out,
                      Activation act, Rng& rng);
  static Dense bind(ParameterSet& params, const std::string& name, Activation act);
  Tensor operator()(const Tensor& x) const { return dense_forward(x, weight, bias, activation); }
};

struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t hidden);
};

/// Gate layout along rows of `weight` ([4H, in + H]): input, forget, candidate, output.
struct LstmWeights {
  Tensor weight;
  Tensor bias;  // [4H]

  std::size_t hidden() const { return bias.size() / 4; }
  std::size_t input() const { return weight.dim(1) - hidden(); }

  /// Uniform fan-in init, zero biases except forget gate (+1).
  static LstmWeights create(ParameterSet& params, const std::string& name, std::size_t input, std::size_t hidden,
                            Rng& rng);
  static LstmWeights bind(ParameterSet& params, const std::string& name);
};

/// One LSTM step. The input state is left untouched; a new state is returned.
LstmState lstm_cell_step(const Tensor& x, const LstmState& state, const LstmWeights& weights);

struct AttentionResult {
  Tensor weights;  // [m], sums to 1
  Tensor context;  // sum_i weights_i * keys[i]
};

/// score_i = (m / sqrt(d_e)) * <W_vv q, W_v k_i>, weights = softmax(scores),
/// context = sum_i weights_i k_i. d_e is the row count of the projections.
AttentionResult scaled_dot_attention(const Tensor& query, std::span<const Tensor> keys, const Tensor& w_query,
                                     const Tensor& w_key);

/// Same scoring with the keys already projected (rows of `projected_keys`, [m, d_e]).
/// Returns only the softmax weights.
Tensor scaled_dot_weights(const Tensor& projected_query, const Tensor& projected_keys);

}  // namespace flightpred::nn
