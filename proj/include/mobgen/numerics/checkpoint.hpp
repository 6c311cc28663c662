#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::numerics {

/// Named tensors plus a free-form metadata string (JSON by convention).
///
/// On-disk layout, little-endian:
///   "MOBGCKPT"  u32 version
///   u64 metadata_len, metadata bytes
///   u64 count, then per tensor:
///     u64 name_len, name bytes, u64 rank, u64 dims[rank], f64 values[numel]
struct Checkpoint {
  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  Tensor find(const std::string& name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// CompatError on bad magic, unknown version or truncation.
Checkpoint deserialize_checkpoint(const std::string& bytes);

/// IoError when the file cannot be written or read.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mobgen::numerics
