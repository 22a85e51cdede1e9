#include "flightpred/nn/layers.hpp"

#include <cmath>

#include "flightpred/error.hpp"
#include "flightpred/nn/ops.hpp"

namespace flightpred::nn {

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b, Activation act) {
  Tensor y = linear(w, x, b);
  switch (act) {
    case Activation::none:
      return y;
    case Activation::relu:
      return relu(y);
    case Activation::tanh:
      return nn::tanh(y);
    case Activation::sigmoid:
      return sigmoid(y);
  }
  return y;
}

Tensor embed(const Tensor& x, const Tensor& w_e) { return relu(matvec(w_e, x)); }

Tensor embed(const Tensor& x, const Tensor& w_e, const Tensor& b_e) { return relu(linear(w_e, x, b_e)); }

Dense Dense::create(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Activation act,
                    Rng& rng) {
  Dense d;
  d.weight = params.add_uniform(name + ".W", Shape{out, in}, rng);
  d.bias = params.add(name + ".b", Shape{out});
  d.activation = act;
  return d;
}

Dense Dense::bind(ParameterSet& params, const std::string& name, Activation act) {
  return Dense{params.at(name + ".W"), params.at(name + ".b"), act};
}

LstmState LstmState::zeros(std::size_t hidden) {
  return {Tensor::zeros(Shape{hidden}), Tensor::zeros(Shape{hidden})};
}

LstmWeights LstmWeights::create(ParameterSet& params, const std::string& name, std::size_t input,
                                std::size_t hidden, Rng& rng) {
  LstmWeights w;
  w.weight = params.add_uniform(name + ".W", Shape{4 * hidden, input + hidden}, rng);
  w.bias = params.add(name + ".b", Shape{4 * hidden});
  auto b = w.bias.mutable_values();
  for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
  return w;
}

LstmWeights LstmWeights::bind(ParameterSet& params, const std::string& name) {
  return LstmWeights{params.at(name + ".W"), params.at(name + ".b")};
}

namespace {

double sigm(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LstmState lstm_cell_step(const Tensor& x, const LstmState& state, const LstmWeights& weights) {
  const std::size_t H = weights.hidden();
  const std::size_t I = x.size();
  if (x.rank() != 1 || state.h.size() != H || state.c.size() != H) {
    throw InvalidArgument("lstm_cell_step: state dimension mismatch");
  }
  if (weights.weight.rank() != 2 || weights.weight.dim(0) != 4 * H || weights.weight.dim(1) != I + H) {
    throw InvalidArgument("lstm_cell_step: weight dimension mismatch");
  }

  std::vector<double> xh(I + H);
  std::copy(x.values().begin(), x.values().end(), xh.begin());
  std::copy(state.h.values().begin(), state.h.values().end(), xh.begin() + static_cast<std::ptrdiff_t>(I));

  const std::size_t cols = I + H;
  const double* W = weights.weight.values().data();
  const auto bias = weights.bias.values();
  const auto c_prev = state.c.values();

  // gates: i, f, g (candidate), o
  std::vector<double> gates(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const double* row = W + r * cols;
    double s0 = 0.0, s1 = 0.0;
    std::size_t k = 0;
    for (; k + 2 <= cols; k += 2) {
      s0 += row[k] * xh[k];
      s1 += row[k + 1] * xh[k + 1];
    }
    for (; k < cols; ++k) s0 += row[k] * xh[k];
    const double z = s0 + s1 + bias[r];
    gates[r] = (r >= 2 * H && r < 3 * H) ? std::tanh(z) : sigm(z);
  }

  std::vector<double> out(2 * H);
  std::vector<double> tanh_c(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double c = gates[H + j] * c_prev[j] + gates[j] * gates[2 * H + j];
    tanh_c[j] = std::tanh(c);
    out[j] = gates[3 * H + j] * tanh_c[j];
    out[H + j] = c;
  }

  Tensor hc = detail::make_result(
      Shape{2 * H}, std::move(out), {x, state.h, state.c, weights.weight, weights.bias},
      [H, I, cols, xh = std::move(xh), gates = std::move(gates), tanh_c = std::move(tanh_c)](detail::Node& self) {
        detail::Node& px = *self.parents[0];
        detail::Node& ph = *self.parents[1];
        detail::Node& pc = *self.parents[2];
        detail::Node& pw = *self.parents[3];
        detail::Node& pb = *self.parents[4];
        std::vector<double> dz(4 * H);
        for (std::size_t j = 0; j < H; ++j) {
          const double i = gates[j], f = gates[H + j], g = gates[2 * H + j], o = gates[3 * H + j];
          const double dh = self.grad[j];
          const double dc = self.grad[H + j] + dh * o * (1.0 - tanh_c[j] * tanh_c[j]);
          dz[j] = dc * g * i * (1.0 - i);
          dz[H + j] = dc * pc.value[j] * f * (1.0 - f);
          dz[2 * H + j] = dc * i * (1.0 - g * g);
          dz[3 * H + j] = dh * tanh_c[j] * o * (1.0 - o);
          if (pc.requires_grad) pc.ensure_grad()[j] += dc * f;
        }
        if (pb.requires_grad) {
          auto& gb = pb.ensure_grad();
          for (std::size_t r = 0; r < 4 * H; ++r) gb[r] += dz[r];
        }
        if (pw.requires_grad) {
          double* gw = pw.ensure_grad().data();
          for (std::size_t r = 0; r < 4 * H; ++r) {
            const double d = dz[r];
            if (d == 0.0) continue;
            double* row = gw + r * cols;
            for (std::size_t k = 0; k < cols; ++k) row[k] += d * xh[k];
          }
        }
        if (px.requires_grad || ph.requires_grad) {
          std::vector<double> dxh(cols, 0.0);
          const double* W = pw.value.data();
          for (std::size_t r = 0; r < 4 * H; ++r) {
            const double d = dz[r];
            if (d == 0.0) continue;
            const double* row = W + r * cols;
            for (std::size_t k = 0; k < cols; ++k) dxh[k] += d * row[k];
          }
          if (px.requires_grad) {
            auto& gx = px.ensure_grad();
            for (std::size_t k = 0; k < I; ++k) gx[k] += dxh[k];
          }
          if (ph.requires_grad) {
            auto& gh = ph.ensure_grad();
            for (std::size_t k = 0; k < H; ++k) gh[k] += dxh[I + k];
          }
        }
      },
      "lstm_cell_step");
  return {slice(hc, 0, H), slice(hc, H, H)};
}

Tensor scaled_dot_weights(const Tensor& projected_query, const Tensor& projected_keys) {
  if (projected_keys.rank() != 2) throw InvalidArgument("attention: projected keys must be [m, d_e]");
  const std::size_t m = projected_keys.dim(0);
  const std::size_t d_e = projected_keys.dim(1);
  if (m == 0) throw InvalidArgument("attention: no keys");
  if (projected_query.size() != d_e) throw InvalidArgument("attention: projection dimension mismatch");
  const double factor = static_cast<double>(m) / std::sqrt(static_cast<double>(d_e));
  Tensor scores = scale(matvec(projected_keys, projected_query), factor);
  return softmax(scores);
}

AttentionResult scaled_dot_attention(const Tensor& query, std::span<const Tensor> keys, const Tensor& w_query,
                                     const Tensor& w_key) {
  if (keys.empty()) throw InvalidArgument("attention: no keys");
  if (w_query.rank() != 2 || w_key.rank() != 2 || w_query.dim(0) != w_key.dim(0)) {
    throw InvalidArgument("attention: projections must map to the same dimension");
  }
  Tensor q = matvec(w_query, query);
  std::vector<Tensor> projected;
  projected.reserve(keys.size());
  for (const auto& k : keys) projected.push_back(matvec(w_key, k));
  Tensor weights = scaled_dot_weights(q, stack(projected));
  Tensor context = matvec_transposed(stack(keys), weights);
  return {weights, context};
}

}  // namespace flightpred::nn
