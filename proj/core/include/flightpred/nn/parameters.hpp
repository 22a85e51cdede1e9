#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "flightpred/nn/tensor.hpp"

namespace flightpred::nn {

using Rng = std::mt19937_64;

/// Ordered, named collection of trainable leaf tensors.
///
/// Insertion order is the canonical order used by optimizers and checkpoints,
/// so two models built by the same code always serialize identically.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  /// Registers a zero-initialized trainable tensor. Names must be unique.
  Tensor& add(const std::string& name, Shape shape);
  /// Registers a matrix drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), fan_in = columns.
  Tensor& add_uniform(const std::string& name, Shape shape, Rng& rng);

  const Tensor& at(const std::string& name) const;
  Tensor& at(const std::string& name);
  bool contains(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::size_t parameter_count() const;

  void zero_grad();
  /// Deep copy with fresh leaves (gradients dropped).
  ParameterSet clone() const;

 private:
  std::vector<Entry> entries_;
};

/// Fills `t` with U(-1/sqrt(fan_in), +1/sqrt(fan_in)) where fan_in is the last dimension
/// (or the product of trailing dimensions for rank > 2).
void init_uniform_fan_in(Tensor& t, Rng& rng);

}  // namespace flightpred::nn
