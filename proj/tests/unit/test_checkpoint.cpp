#include "grlp/checkpoint.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>

namespace grlp {
namespace {

Checkpoint sample() {
  Checkpoint cp;
  cp.config = {{"lambda", 0.4}, {"variant", "full"}};
  cp.step = 42;
  cp.rng_state = "123 456 789";
  cp.baseline = -0.125;
  cp.baseline_ready = true;
  cp.tensors.push_back({"w", {3}, {1.0, -2.5, 1e-300}});
  cp.tensors.push_back({"m", {2, 2}, {0.1, 0.2, 0.3, 0.4}});
  return cp;
}

void expect_same(const Checkpoint& a, const Checkpoint& b) {
  EXPECT_EQ(a.config, b.config);
  EXPECT_EQ(a.step, b.step);
  EXPECT_EQ(a.rng_state, b.rng_state);
  EXPECT_EQ(std::memcmp(&a.baseline, &b.baseline, sizeof(double)), 0);
  EXPECT_EQ(a.baseline_ready, b.baseline_ready);
  EXPECT_EQ(a.tensors, b.tensors);
}

TEST(Checkpoint, RoundTripInMemory) {
  const auto cp = sample();
  const auto bytes = serialize_checkpoint(cp);
  EXPECT_EQ(bytes.substr(0, 4), "GRLP");
  expect_same(cp, deserialize_checkpoint(bytes));
  EXPECT_EQ(serialize_checkpoint(deserialize_checkpoint(bytes)), bytes);
}

TEST(Checkpoint, RoundTripOnDisk) {
  const auto path = std::filesystem::temp_directory_path() / "grlp_ckpt_test.bin";
  save_checkpoint(path, sample());
  expect_same(sample(), load_checkpoint(path));
  std::filesystem::remove(path);
  EXPECT_GRLP_ERROR(load_checkpoint(path), ErrorKind::io);
}

TEST(Checkpoint, TruncationDetected) {
  const auto bytes = serialize_checkpoint(sample());
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{11}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_GRLP_ERROR(deserialize_checkpoint(std::string_view(bytes).substr(0, cut)), ErrorKind::integrity);
  }
}

TEST(Checkpoint, CorruptionDetected) {
  auto bytes = serialize_checkpoint(sample());
  bytes[bytes.size() / 2] ^= 0x40;
  EXPECT_GRLP_ERROR(deserialize_checkpoint(bytes), ErrorKind::integrity);
  bytes = serialize_checkpoint(sample());
  bytes[0] = 'X';
  EXPECT_GRLP_ERROR(deserialize_checkpoint(bytes), ErrorKind::integrity);
}

TEST(Checkpoint, VersionMismatchRejected) {
  auto bytes = serialize_checkpoint(sample());
  bytes[4] = static_cast<char>(Checkpoint::kFormatVersion + 1);
  // Re-seal so only the version differs.
  const std::uint64_t sum = fnv1a64(std::string_view(bytes).substr(0, bytes.size() - 8));
  std::memcpy(bytes.data() + bytes.size() - 8, &sum, 8);
  try {
    deserialize_checkpoint(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::integrity);
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, ShapeMustMatchPayload) {
  auto cp = sample();
  cp.tensors[0].shape = {4};
  EXPECT_GRLP_ERROR(serialize_checkpoint(cp), ErrorKind::shape);
}

TEST(Checkpoint, FindAndFnv) {
  const auto cp = sample();
  ASSERT_NE(cp.find("m"), nullptr);
  EXPECT_EQ(cp.find("zz"), nullptr);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace grlp
