#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "flightpred/nn/parameters.hpp"

namespace flightpred::nn {

inline constexpr const char* kCheckpointFormat = "PCKPT1";

/// Run metadata stored alongside the weights.
struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::map<std::string, double> hyperparameters;
  std::map<std::string, std::string> tags;
};

struct Checkpoint {
  CheckpointMeta meta;
  ParameterSet params;
};

/// Layout: "PCKPT1\n", manifest byte count and "\n", a JSON manifest
/// (format, seed, hyperparameters, tags, tensors[name, shape, offset]),
/// then every tensor as little-endian IEEE-754 binary64 in manifest order.
std::string encode_checkpoint(const ParameterSet& params, const CheckpointMeta& meta);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies values from `source` into `target` by name; shapes must match exactly.
void assign_parameters(ParameterSet& target, const ParameterSet& source);

}  // namespace flightpred::nn
