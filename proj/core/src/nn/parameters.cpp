#include "flightpred/nn/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "flightpred/error.hpp"

namespace flightpred::nn {

void init_uniform_fan_in(Tensor& t, Rng& rng) {
  std::size_t fan_in = 1;
  if (t.rank() >= 2) {
    for (std::size_t i = 1; i < t.rank(); ++i) fan_in *= t.dim(i);
  } else {
    fan_in = t.size();
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.mutable_values()) v = dist(rng);
}

Tensor& ParameterSet::add(const std::string& name, Shape shape) {
  if (contains(name)) throw InvalidArgument("duplicate parameter name: " + name);
  entries_.push_back({name, Tensor::zeros(std::move(shape), true)});
  return entries_.back().tensor;
}

Tensor& ParameterSet::add_uniform(const std::string& name, Shape shape, Rng& rng) {
  Tensor& t = add(name, std::move(shape));
  init_uniform_fan_in(t, rng);
  return t;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw InvalidArgument("unknown parameter: " + name);
}

Tensor& ParameterSet::at(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).at(name));
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& e : entries_) out.entries_.push_back({e.name, e.tensor.clone(true)});
  return out;
}

}  // namespace flightpred::nn
