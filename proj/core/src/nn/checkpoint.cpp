#include "flightpred/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flightpred/error.hpp"

namespace flightpred::nn {

namespace {

void put_f64_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string encode_checkpoint(const ParameterSet& params, const CheckpointMeta& meta) {
  nlohmann::json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["seed"] = meta.seed;
  manifest["hyperparameters"] = meta.hyperparameters;
  manifest["tags"] = meta.tags;
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& e : params.entries()) {
    tensors.push_back({{"name", e.name}, {"shape", e.tensor.shape()}, {"offset", offset}});
    offset += e.tensor.size();
  }
  manifest["tensors"] = tensors;
  const std::string text = manifest.dump();

  std::string out;
  out.reserve(text.size() + 32 + offset * 8);
  out += kCheckpointFormat;
  out += '\n';
  out += std::to_string(text.size());
  out += '\n';
  out += text;
  for (const auto& e : params.entries()) {
    for (double v : e.tensor.values()) put_f64_le(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  const std::string magic = std::string(kCheckpointFormat) + "\n";
  if (bytes.compare(0, magic.size(), magic) != 0) throw DataError("checkpoint: bad magic, expected PCKPT1");
  const std::size_t nl = bytes.find('\n', magic.size());
  if (nl == std::string::npos) throw DataError("checkpoint: truncated header");
  std::size_t manifest_size = 0;
  try {
    manifest_size = std::stoull(bytes.substr(magic.size(), nl - magic.size()));
  } catch (const std::exception&) {
    throw DataError("checkpoint: malformed manifest length");
  }
  const std::size_t manifest_begin = nl + 1;
  if (manifest_begin + manifest_size > bytes.size()) throw DataError("checkpoint: truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(manifest_begin, manifest_size));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: manifest is not valid JSON: ") + e.what());
  }
  if (manifest.value("format", "") != kCheckpointFormat) throw DataError("checkpoint: unsupported format version");

  Checkpoint ck;
  ck.meta.seed = manifest.at("seed").get<std::uint64_t>();
  ck.meta.hyperparameters = manifest.at("hyperparameters").get<std::map<std::string, double>>();
  ck.meta.tags = manifest.value("tags", std::map<std::string, std::string>{});

  const auto* blob = reinterpret_cast<const unsigned char*>(bytes.data() + manifest_begin + manifest_size);
  const std::size_t blob_doubles = (bytes.size() - manifest_begin - manifest_size) / 8;
  if ((bytes.size() - manifest_begin - manifest_size) % 8 != 0) throw DataError("checkpoint: blob is not 8-byte aligned");

  std::size_t expected_offset = 0;
  for (const auto& t : manifest.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<Shape>();
    const auto offset = t.at("offset").get<std::size_t>();
    const std::size_t n = element_count(shape);
    if (offset != expected_offset || offset + n > blob_doubles) throw DataError("checkpoint: inconsistent offsets for " + name);
    Tensor& dst = ck.params.add(name, shape);
    auto values = dst.mutable_values();
    for (std::size_t i = 0; i < n; ++i) values[i] = get_f64_le(blob + 8 * (offset + i));
    expected_offset += n;
  }
  if (expected_offset != blob_doubles) throw DataError("checkpoint: blob size does not match manifest");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  const std::string bytes = encode_checkpoint(params, meta);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

void assign_parameters(ParameterSet& target, const ParameterSet& source) {
  for (auto& e : target.entries()) {
    const Tensor& src = source.at(e.name);
    if (src.shape() != e.tensor.shape()) throw DataError("checkpoint: shape mismatch for " + e.name);
    auto dst = e.tensor.mutable_values();
    std::copy(src.values().begin(), src.values().end(), dst.begin());
  }
  if (source.entries().size() != target.entries().size()) throw DataError("checkpoint: parameter count mismatch");
}

}  // namespace flightpred::nn
