#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "fd3/unet.hpp"

namespace fd3 {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'F', 'D', '3', 'C'};

// Layout (little-endian):
//   magic "FD3C" | u32 format_version | u32 n | n bytes UTF-8 config block
//   | u32 tensor_count | tensors... | u64 FNV-1a of everything before it
// The config block holds "arch.<key>=value" and "meta.<key>=value" lines.
// Each tensor is u32 name length, name, u32 rank, i32 dims[rank], f32 data.
struct Checkpoint {
  std::unique_ptr<UNet> model;
  std::map<std::string, std::string> metadata;  // e.g. epochs, seed, dataset_hash
};

void save_checkpoint(const UNet& model, const std::map<std::string, std::string>& metadata,
                     const std::filesystem::path& path);

// IoError if unreadable, VersionError on a format_version mismatch,
// DecodeError (naming the tensor where relevant) for anything malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fd3
