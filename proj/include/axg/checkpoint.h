#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "axg/tensor.h"

namespace axg {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// On disk: "AXG1", u32 little-endian header length, UTF-8 JSON header
// {version, kind, config, tensors:[{name, shape, offset}], metadata}, then raw
// little-endian float32 blobs in header order (offsets in bytes from the blob start).
struct Checkpoint {
  static constexpr int kVersion = 1;

  int version = kVersion;
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::vector<NamedTensor> tensors;
  nlohmann::json metadata = nlohmann::json::object();

  const Tensor& tensor(std::string_view name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace axg
