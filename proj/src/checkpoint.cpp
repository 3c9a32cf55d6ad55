#include "axg/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "axg/errors.h"

namespace axg {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

namespace {
constexpr char kMagic[4] = {'A', 'X', 'G', '1'};
}

const Tensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  throw FormatError("checkpoint has no tensor named '" + std::string(name) + "'");
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json table = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    table.push_back({{"name", t.name}, {"shape", t.tensor.shape}, {"offset", offset}});
    offset += t.tensor.numel() * sizeof(float);
  }
  const nlohmann::json header = {{"version", ckpt.version},
                                 {"kind", ckpt.kind},
                                 {"config", ckpt.config},
                                 {"tensors", table},
                                 {"metadata", ckpt.metadata}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), text.begin(), text.end());
  const std::size_t blob_start = out.size();
  out.resize(blob_start + offset);
  std::size_t at = blob_start;
  for (const auto& t : ckpt.tensors) {
    std::memcpy(out.data() + at, t.tensor.data.data(), t.tensor.numel() * sizeof(float));
    at += t.tensor.numel() * sizeof(float);
  }
  return out;
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("checkpoint: bad magic (expected AXG1)");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[4 + i]) << (8 * i);
  if (8 + static_cast<std::size_t>(len) > bytes.size()) throw FormatError("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: header is not valid JSON: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.version = header.at("version").get<int>();
    if (ckpt.version != Checkpoint::kVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(ckpt.version));
    }
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.config = header.at("config");
    ckpt.metadata = header.at("metadata");
    const std::size_t blob_start = 8 + len;
    for (const auto& entry : header.at("tensors")) {
      NamedTensor nt;
      nt.name = entry.at("name").get<std::string>();
      auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const std::size_t count = shape_numel(shape);
      if (blob_start + offset + count * sizeof(float) > bytes.size()) {
        throw FormatError("checkpoint: tensor '" + nt.name + "' runs past end of file");
      }
      std::vector<float> data(count);
      std::memcpy(data.data(), bytes.data() + blob_start + offset, count * sizeof(float));
      nt.tensor = Tensor(std::move(shape), std::move(data));
      ckpt.tensors.push_back(std::move(nt));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed header: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(ckpt);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

}  // namespace axg
