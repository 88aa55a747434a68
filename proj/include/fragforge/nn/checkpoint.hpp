#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "fragforge/error.hpp"
#include "fragforge/nn/parameters.hpp"

namespace fragforge::nn {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian):
//   8 bytes   magic "FFCKPT01"
//   u32       format version
//   u32       metadata entry count, then per entry: u32 key length, key,
//             u32 value length, value
//   u32       tensor count, then per tensor: u32 name length, name,
//             u64 rows, u64 cols, rows*cols f64 in row-major order
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  ParameterSet params;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Writes through a temporary file and renames, so a crash never leaves a
// truncated checkpoint behind.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fragforge::nn
