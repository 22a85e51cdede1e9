#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace flightpred::nn {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

namespace detail {

// One vertex of the reverse-mode tape. Results of ops hold shared ownership of
// their parents, so a graph lives exactly as long as the tensors that reach it.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Accumulates this node's grad into its parents' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad();
};

}  // namespace detail

/// Dense row-major double tensor with an optional reverse-mode gradient.
///
/// Copies are shallow handles onto the same storage; use `clone()` for a deep
/// copy. Tensors created with `requires_grad` are leaves whose gradients
/// accumulate across `backward()` calls until `zero_grad()`.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor vector(std::initializer_list<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }

  std::span<const double> values() const;
  // Direct write access. Meant for parameter updates and test setup only:
  // mutating a tensor that already feeds a live graph invalidates its backward.
  std::span<double> mutable_values();
  double operator[](std::size_t i) const { return values()[i]; }
  double item() const;

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Backpropagates from a single-element tensor, seeding d(self)/d(self) = 1.
  void backward() const;

  /// Same storage values, cut from the graph.
  Tensor detach() const;
  Tensor clone(bool requires_grad = false) const;

  std::vector<double> to_vector() const;

  // Internal: used by ops to build graph nodes.
  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

/// Creates an op result. When no parent requires a gradient the closure and
/// parent links are dropped, so inference builds no tape.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward, const char* op_name);

}  // namespace detail

}  // namespace flightpred::nn
