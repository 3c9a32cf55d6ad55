#include <filesystem>

#include <gtest/gtest.h>

#include "axg/checkpoint.h"
#include "axg/errors.h"
#include "axg/hash.h"
#include "axg/random.h"

using namespace axg;

namespace {

Checkpoint sample() {
  Checkpoint c;
  c.kind = "test";
  c.config = {{"a", 1}};
  Rng rng(5);
  Tensor w({2, 3});
  for (auto& v : w.data) v = static_cast<float>(rng.uniform(-1, 1));
  w.data[0] = 1e-38f;  // subnormal-adjacent value survives
  c.tensors = {{"w", w}, {"b", Tensor({3}, {0.1f, -0.0f, 3.5f})}};
  c.metadata = {{"seed", 5}, {"final_loss", 0.25}};
  return c;
}

TEST(Checkpoint, RoundTripBitExact) {
  const Checkpoint c = sample();
  const auto bytes = serialize_checkpoint(c);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "AXG1");
  const Checkpoint back = parse_checkpoint(bytes);
  EXPECT_EQ(back.kind, "test");
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(back.metadata, c.metadata);
  ASSERT_EQ(back.tensors.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.tensors[i].name, c.tensors[i].name);
    EXPECT_EQ(back.tensors[i].tensor.shape, c.tensors[i].tensor.shape);
    EXPECT_EQ(0, std::memcmp(back.tensors[i].tensor.data.data(), c.tensors[i].tensor.data.data(),
                             c.tensors[i].tensor.data.size() * sizeof(float)));
  }
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTripAndHash) {
  const auto path = std::filesystem::temp_directory_path() / "axg_test.axg";
  write_checkpoint(sample(), path);
  const auto h = sha256_file(path);
  write_checkpoint(read_checkpoint(path), path);
  EXPECT_EQ(sha256_file(path), h);
  std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptInputs) {
  auto bytes = serialize_checkpoint(sample());
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bad), FormatError);
  EXPECT_THROW(parse_checkpoint(std::span(bytes.data(), bytes.size() - 4)), FormatError);
  EXPECT_THROW(parse_checkpoint(std::span(bytes.data(), 6)), FormatError);
  EXPECT_THROW(read_checkpoint("/nonexistent.axg"), FormatError);
}

TEST(Checkpoint, MissingTensorName) {
  EXPECT_THROW(sample().tensor("nope"), FormatError);
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
