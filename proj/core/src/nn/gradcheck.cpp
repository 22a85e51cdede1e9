#include "flightpred/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flightpred/error.hpp"

namespace flightpred::nn {

double finite_diff_gradcheck(const ScalarFunction& fn, const std::vector<Tensor>& inputs, double eps) {
  return finite_diff_gradcheck(fn, inputs, std::vector<double>{eps});
}

double finite_diff_gradcheck(const ScalarFunction& fn, const std::vector<Tensor>& inputs,
                             const std::vector<double>& steps) {
  if (steps.empty()) throw InvalidArgument("gradcheck: no step sizes");
  for (double h : steps)
    if (!(h > 0.0)) throw InvalidArgument("gradcheck: step sizes must be positive");
  std::vector<Tensor> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(t.clone(true));

  Tensor out = fn(leaves);
  if (out.size() != 1) throw InvalidArgument("gradcheck: function must return a scalar");
  out.backward();
  // Roundoff in f is about |f| ulp, so the differences carry ~|f| 1e-16 / eps of noise.
  const double floor = 1e-6 * std::max(1.0, std::abs(out.item()));

  std::vector<std::vector<double>> analytic;
  for (const auto& l : leaves) {
    auto g = l.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(l.size(), 0.0);
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      auto eval_at = [&](double delta) {
        std::vector<Tensor> probe;
        probe.reserve(inputs.size());
        for (const auto& t : inputs) probe.push_back(t.clone(false));
        probe[i].mutable_values()[k] += delta;
        const double v = fn(probe).item();
        if (!std::isfinite(v)) throw NumericError("gradcheck: non-finite intermediate");
        return v;
      };
      const double a = analytic[i][k];
      double best = std::numeric_limits<double>::infinity();
      for (double eps : steps) {
        // Five-point stencil: truncation error O(eps^4) allows a larger step.
        const double numeric =
            (8.0 * (eval_at(eps) - eval_at(-eps)) - (eval_at(2.0 * eps) - eval_at(-2.0 * eps))) / (12.0 * eps);
        best = std::min(best, std::abs(a - numeric) / std::max(floor, std::abs(a) + std::abs(numeric)));
        if (best < 1e-6) break;
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace flightpred::nn
