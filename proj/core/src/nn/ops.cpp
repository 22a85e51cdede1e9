#include "flightpred/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "flightpred/error.hpp"

namespace flightpred::nn {

using detail::make_result;
using detail::Node;

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) throw InvalidArgument(std::string(op) + ": shape mismatch");
}

void require_vector(const Tensor& a, const char* op) {
  if (a.rank() != 1) throw InvalidArgument(std::string(op) + ": expected a vector");
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

// Elementwise unary op; `deriv(x, y)` returns dy/dx.
template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, Fwd fwd, Deriv deriv, const char* name) {
  const auto in = a.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  return make_result(
      a.shape(), std::move(out), {a},
      [deriv](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(p.value[i], self.value[i]);
      },
      name);
}

double dot_kernel(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy_kernel(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        for (std::size_t k = 0; k < 2; ++k) {
          Node& p = parent(self, k);
          if (!p.requires_grad) continue;
          auto& g = p.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
      },
      "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) {
          auto& g = pa.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (pb.requires_grad) {
          auto& g = pb.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) {
          auto& g = pa.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
          auto& g = pb.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
        }
      },
      "mul");
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / b[i];
  return make_result(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) {
          auto& g = pa.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / pb.value[i];
        }
        if (pb.requires_grad) {
          auto& g = pb.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i] * self.value[i] / pb.value[i];
        }
      },
      "div");
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      a, [factor](double x) { return x * factor; }, [factor](double, double) { return factor; }, "scale");
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; }, "add_scalar");
}

Tensor affine(const Tensor& a, std::span<const double> factor, std::span<const double> offset) {
  if (factor.size() != a.size() || offset.size() != a.size()) throw InvalidArgument("affine: size mismatch");
  std::vector<double> f(factor.begin(), factor.end());
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * f[i] + offset[i];
  return make_result(
      a.shape(), std::move(out), {a},
      [f = std::move(f)](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * f[i];
      },
      "affine");
}

Tensor relu(const Tensor& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; },
      "relu");
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; }, "tanh");
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

Tensor exp(const Tensor& a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; }, "exp");
}

Tensor log(const Tensor& a) {
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; }, "log");
}

Tensor sin(const Tensor& a) {
  return unary(
      a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); }, "sin");
}

Tensor cos(const Tensor& a) {
  return unary(
      a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); }, "cos");
}

Tensor sqrt(const Tensor& a) {
  return unary(
      a, [](double x) { return std::sqrt(x); }, [](double, double y) { return 0.5 / y; }, "sqrt");
}

Tensor asin(const Tensor& a) {
  return unary(
      a, [](double x) { return std::asin(x); }, [](double x, double) { return 1.0 / std::sqrt(1.0 - x * x); },
      "asin");
}

Tensor square(const Tensor& a) {
  return unary(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; }, "square");
}

namespace {
constexpr double kSeriesBelow = 1e-8;
}  // namespace

Tensor asin_sqrt_squared(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        if (x < kSeriesBelow) return x + x * x / 3.0;
        const double s = std::asin(std::sqrt(x));
        return s * s;
      },
      [](double x, double) {
        if (x < kSeriesBelow) return 1.0 + 2.0 * x / 3.0;
        return std::asin(std::sqrt(x)) / (std::sqrt(x) * std::sqrt(1.0 - x));
      },
      "asin_sqrt_squared");
}

Tensor asin_sqrt_ratio(const Tensor& a) {
  // Power series below 1e-3; the closed-form derivative cancels badly there.
  constexpr double kRatioSeriesBelow = 1e-3;
  return unary(
      a,
      [](double x) {
        if (x < kRatioSeriesBelow) return 1.0 + x * (1.0 / 6.0 + x * (3.0 / 40.0 + x * (5.0 / 112.0 + x * 35.0 / 1152.0)));
        return std::asin(std::sqrt(x)) / std::sqrt(x);
      },
      [](double x, double) {
        if (x < kRatioSeriesBelow) return 1.0 / 6.0 + x * (3.0 / 20.0 + x * (15.0 / 112.0 + x * 35.0 / 288.0));
        const double s = std::sqrt(x);
        return (s / std::sqrt(1.0 - x) - std::asin(s)) / (2.0 * x * s);
      },
      "asin_sqrt_ratio");
}

Tensor atan2(const Tensor& y, const Tensor& x) {
  require_same_shape(y, x, "atan2");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::atan2(y[i], x[i]);
  return make_result(
      y.shape(), std::move(out), {y, x},
      [](Node& self) {
        Node& py = parent(self, 0);
        Node& px = parent(self, 1);
        for (std::size_t i = 0; i < self.value.size(); ++i) {
          const double yy = py.value[i];
          const double xx = px.value[i];
          const double r2 = xx * xx + yy * yy;
          if (py.requires_grad) py.ensure_grad()[i] += self.grad[i] * xx / r2;
          if (px.requires_grad) px.ensure_grad()[i] -= self.grad[i] * yy / r2;
        }
      },
      "atan2");
}

Tensor wrap_degrees(const Tensor& a) {
  return unary(
      a,
      [](double x) {
        double w = std::fmod(x, 360.0);
        if (w > 180.0) w -= 360.0;
        if (w <= -180.0) w += 360.0;
        return w;
      },
      [](double, double) { return 1.0; }, "wrap_degrees");
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; }, "clamp");
}

Tensor sum(const Tensor& a) {
  const auto v = a.values();
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  return make_result(
      Shape{1}, {s}, {a},
      [](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (double& gi : g) gi += self.grad[0];
      },
      "sum");
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  const double s = dot_kernel(a.values().data(), b.values().data(), a.size());
  return make_result(
      Shape{1}, {s}, {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        const double g0 = self.grad[0];
        if (pa.requires_grad) axpy_kernel(g0, pb.value.data(), pa.ensure_grad().data(), pa.value.size());
        if (pb.requires_grad) axpy_kernel(g0, pa.value.data(), pb.ensure_grad().data(), pb.value.size());
      },
      "dot");
}

Tensor softmax(const Tensor& a) {
  require_vector(a, "softmax");
  if (a.size() == 0) throw InvalidArgument("softmax: empty input");
  const auto v = a.values();
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    z += out[i];
  }
  for (double& o : out) o /= z;
  return make_result(
      a.shape(), std::move(out), {a},
      [](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        const double gy = dot_kernel(self.grad.data(), self.value.data(), self.value.size());
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.value[i] * (self.grad[i] - gy);
      },
      "softmax");
}

Tensor cumsum(const Tensor& a) {
  require_vector(a, "cumsum");
  std::vector<double> out(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    s += a[i];
    out[i] = s;
  }
  return make_result(
      a.shape(), std::move(out), {a},
      [](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        double acc = 0.0;
        for (std::size_t i = g.size(); i-- > 0;) {
          acc += self.grad[i];
          g[i] += acc;
        }
      },
      "cumsum");
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2) throw InvalidArgument("matvec: weight must be a matrix");
  require_vector(x, "matvec");
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  if (x.size() != cols) throw InvalidArgument("matvec: dimension mismatch");
  std::vector<double> out(rows);
  const double* wd = w.values().data();
  const double* xd = x.values().data();
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_kernel(wd + r * cols, xd, cols);
  return make_result(
      Shape{rows}, std::move(out), {w, x},
      [rows, cols](Node& self) {
        Node& pw = parent(self, 0);
        Node& px = parent(self, 1);
        if (pw.requires_grad) {
          double* gw = pw.ensure_grad().data();
          for (std::size_t r = 0; r < rows; ++r) {
            if (self.grad[r] != 0.0) axpy_kernel(self.grad[r], px.value.data(), gw + r * cols, cols);
          }
        }
        if (px.requires_grad) {
          double* gx = px.ensure_grad().data();
          for (std::size_t r = 0; r < rows; ++r) {
            if (self.grad[r] != 0.0) axpy_kernel(self.grad[r], pw.value.data() + r * cols, gx, cols);
          }
        }
      },
      "matvec");
}

Tensor matvec_transposed(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2) throw InvalidArgument("matvec_transposed: weight must be a matrix");
  require_vector(x, "matvec_transposed");
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  if (x.size() != rows) throw InvalidArgument("matvec_transposed: dimension mismatch");
  std::vector<double> out(cols, 0.0);
  const double* wd = w.values().data();
  for (std::size_t r = 0; r < rows; ++r) axpy_kernel(x[r], wd + r * cols, out.data(), cols);
  return make_result(
      Shape{cols}, std::move(out), {w, x},
      [rows, cols](Node& self) {
        Node& pw = parent(self, 0);
        Node& px = parent(self, 1);
        if (pw.requires_grad) {
          double* gw = pw.ensure_grad().data();
          for (std::size_t r = 0; r < rows; ++r) axpy_kernel(px.value[r], self.grad.data(), gw + r * cols, cols);
        }
        if (px.requires_grad) {
          auto& gx = px.ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) gx[r] += dot_kernel(pw.value.data() + r * cols, self.grad.data(), cols);
        }
      },
      "matvec_transposed");
}

Tensor linear(const Tensor& w, const Tensor& x, const Tensor& b) {
  if (w.rank() != 2) throw InvalidArgument("linear: weight must be a matrix");
  require_vector(x, "linear");
  require_vector(b, "linear");
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.dim(1);
  if (x.size() != cols || b.size() != rows) throw InvalidArgument("linear: dimension mismatch");
  std::vector<double> out(rows);
  const double* wd = w.values().data();
  const double* xd = x.values().data();
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_kernel(wd + r * cols, xd, cols) + b[r];
  return make_result(
      Shape{rows}, std::move(out), {w, x, b},
      [rows, cols](Node& self) {
        Node& pw = parent(self, 0);
        Node& px = parent(self, 1);
        Node& pb = parent(self, 2);
        if (pw.requires_grad) {
          double* gw = pw.ensure_grad().data();
          for (std::size_t r = 0; r < rows; ++r) {
            if (self.grad[r] != 0.0) axpy_kernel(self.grad[r], px.value.data(), gw + r * cols, cols);
          }
        }
        if (px.requires_grad) {
          double* gx = px.ensure_grad().data();
          for (std::size_t r = 0; r < rows; ++r) {
            if (self.grad[r] != 0.0) axpy_kernel(self.grad[r], pw.value.data() + r * cols, gx, cols);
          }
        }
        if (pb.requires_grad) {
          auto& gb = pb.ensure_grad();
          for (std::size_t r = 0; r < rows; ++r) gb[r] += self.grad[r];
        }
      },
      "linear");
}

Tensor concat(std::span<const Tensor> parts) {
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  std::vector<Tensor> parents(parts.begin(), parts.end());
  for (const auto& p : parts) {
    require_vector(p, "concat");
    offsets.push_back(out.size());
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  const std::size_t n = out.size();
  return make_result(
      Shape{n}, std::move(out), std::move(parents),
      [offsets = std::move(offsets)](Node& self) {
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
          Node& p = parent(self, k);
          if (!p.requires_grad) continue;
          auto& g = p.ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[k] + i];
        }
      },
      "concat");
}

Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}

Tensor slice(const Tensor& a, std::size_t offset, std::size_t length) {
  require_vector(a, "slice");
  if (offset + length > a.size()) throw InvalidArgument("slice: range out of bounds");
  std::vector<double> out(a.values().begin() + static_cast<std::ptrdiff_t>(offset),
                          a.values().begin() + static_cast<std::ptrdiff_t>(offset + length));
  return make_result(
      Shape{length}, std::move(out), {a},
      [offset](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
      },
      "slice");
}

Tensor gather(const Tensor& a, std::vector<std::size_t> indices) {
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= a.size()) throw InvalidArgument("gather: index out of bounds");
    out[i] = a[indices[i]];
  }
  return make_result(
      Shape{indices.size()}, std::move(out), {a},
      [indices = std::move(indices)](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < indices.size(); ++i) g[indices[i]] += self.grad[i];
      },
      "gather");
}

Tensor stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw InvalidArgument("stack: no rows");
  const std::size_t n = rows.front().size();
  for (const auto& r : rows) {
    require_vector(r, "stack");
    if (r.size() != n) throw InvalidArgument("stack: rows differ in length");
  }
  Tensor flat = concat(rows);
  return reshape(flat, Shape{rows.size(), n});
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) throw InvalidArgument("reshape: element count mismatch");
  return make_result(
      std::move(shape), a.to_vector(), {a},
      [](Node& self) {
        Node& p = parent(self, 0);
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      },
      "reshape");
}

std::size_t conv2d_output_size(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
  if (stride == 0) throw InvalidArgument("conv2d: stride must be positive");
  if (in + 2 * padding < kernel) throw InvalidArgument("conv2d: kernel does not fit the padded input");
  return (in + 2 * padding - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias, std::size_t stride,
              std::size_t padding) {
  if (input.rank() != 3) throw InvalidArgument("conv2d: input must be [C, H, W]");
  if (kernels.rank() != 4) throw InvalidArgument("conv2d: kernels must be [O, C, k, k]");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t O = kernels.dim(0), K = kernels.dim(2);
  if (kernels.dim(1) != C) throw InvalidArgument("conv2d: channel mismatch");
  if (kernels.dim(3) != K) throw InvalidArgument("conv2d: kernels must be square");
  if (bias.size() != O) throw InvalidArgument("conv2d: bias size mismatch");
  const std::size_t Ho = conv2d_output_size(H, K, stride, padding);
  const std::size_t Wo = conv2d_output_size(W, K, stride, padding);

  const double* x = input.values().data();
  const double* k = kernels.values().data();
  std::vector<double> out(O * Ho * Wo);
  for (std::size_t o = 0; o < O; ++o) {
    for (std::size_t i = 0; i < Ho; ++i) {
      for (std::size_t j = 0; j < Wo; ++j) {
        double acc = bias[o];
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t u = 0; u < K; ++u) {
            const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i * stride + u) - static_cast<std::ptrdiff_t>(padding);
            if (r < 0 || r >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t v = 0; v < K; ++v) {
              const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(j * stride + v) - static_cast<std::ptrdiff_t>(padding);
              if (s < 0 || s >= static_cast<std::ptrdiff_t>(W)) continue;
              acc += k[((o * C + c) * K + u) * K + v] * x[(c * H + static_cast<std::size_t>(r)) * W + static_cast<std::size_t>(s)];
            }
          }
        }
        out[(o * Ho + i) * Wo + j] = acc;
      }
    }
  }
  return make_result(
      Shape{O, Ho, Wo}, std::move(out), {input, kernels, bias},
      [=](Node& self) {
        Node& pin = parent(self, 0);
        Node& pk = parent(self, 1);
        Node& pb = parent(self, 2);
        double* gx = pin.requires_grad ? pin.ensure_grad().data() : nullptr;
        double* gk = pk.requires_grad ? pk.ensure_grad().data() : nullptr;
        double* gb = pb.requires_grad ? pb.ensure_grad().data() : nullptr;
        const double* xv = pin.value.data();
        const double* kv = pk.value.data();
        for (std::size_t o = 0; o < O; ++o) {
          for (std::size_t i = 0; i < Ho; ++i) {
            for (std::size_t j = 0; j < Wo; ++j) {
              const double g = self.grad[(o * Ho + i) * Wo + j];
              if (g == 0.0) continue;
              if (gb) gb[o] += g;
              for (std::size_t c = 0; c < C; ++c) {
                for (std::size_t u = 0; u < K; ++u) {
                  const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i * stride + u) - static_cast<std::ptrdiff_t>(padding);
                  if (r < 0 || r >= static_cast<std::ptrdiff_t>(H)) continue;
                  for (std::size_t v = 0; v < K; ++v) {
                    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(j * stride + v) - static_cast<std::ptrdiff_t>(padding);
                    if (s < 0 || s >= static_cast<std::ptrdiff_t>(W)) continue;
                    const std::size_t xi = (c * H + static_cast<std::size_t>(r)) * W + static_cast<std::size_t>(s);
                    const std::size_t ki = ((o * C + c) * K + u) * K + v;
                    if (gk) gk[ki] += g * xv[xi];
                    if (gx) gx[xi] += g * kv[ki];
                  }
                }
              }
            }
          }
        }
      },
      "conv2d");
}

}  // namespace flightpred::nn
