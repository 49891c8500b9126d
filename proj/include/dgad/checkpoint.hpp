#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dgad/model.hpp"
#include "dgad/prototypes.hpp"

namespace dgad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  PrototypeBuffer buffer;
  std::map<std::string, std::string> metadata;
};

// Container layout (little-endian):
//   "DGADCKPT" | u32 version | records... | end record | u64 FNV-1a of all prior bytes
// record := u8 kind | u32 name_len | name | payload
//   kind 1 (array):  u32 rank | u64 dims[rank] | f64 values[prod(dims)]
//   kind 2 (string): u64 len | bytes
//   kind 0 (end):    empty name, no payload
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
// Throws FormatError on a bad magic, version mismatch, truncation, checksum
// mismatch or missing arrays; nothing is returned in those cases.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dgad
