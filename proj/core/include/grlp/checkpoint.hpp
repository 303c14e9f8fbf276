#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;  // row-major

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Binary layout (little-endian):
///   "GRLP" | u32 format_version | u64 config digest
///   | u32 len + config JSON | u64 step | u32 len + rng state | f64 baseline | u8 baseline_ready
///   | u32 tensor count | per tensor: u32 len + name, u32 rank, u64 dims[rank], f64 payload
///   | u64 FNV-1a checksum of everything before it
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  nlohmann::json config = nlohmann::json::object();
  std::uint64_t step = 0;
  std::string rng_state;
  double baseline = 0.0;
  bool baseline_ready = false;
  std::vector<NamedTensor> tensors;

  std::uint64_t config_digest() const;
  const NamedTensor* find(std::string_view name) const;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace grlp
