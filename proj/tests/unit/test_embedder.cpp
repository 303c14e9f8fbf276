#include "grlp/embedder.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace grlp {
namespace {

TEST(HashEmbedder, MatchesScriptedOracle) {
  // tests/oracles/hash_embed_oracle.py: "the" -> bucket 4, "cat" -> bucket 7 at d=8.
  HashEmbedder e(8);
  EXPECT_EQ(e.bucket("the"), 4u);
  EXPECT_EQ(e.bucket("cat"), 7u);
  Vector expected = Vector::Zero(8);
  expected[4] = expected[7] = 1.0 / std::sqrt(2.0);
  EXPECT_TRUE(e.embed_text("the cat").isApprox(expected, 1e-15));
  EXPECT_TRUE(e.embed_text("  The\tCAT ").isApprox(expected, 1e-15));
}

TEST(HashEmbedder, DeterministicAndZeroForEmpty) {
  HashEmbedder e(16);
  EXPECT_EQ(e.embed_text("same words here"), e.embed_text("same words here"));
  EXPECT_TRUE((e.embed_text("").array() == 0.0).all());
  EXPECT_TRUE((e.embed_text(" \n ").array() == 0.0).all());
}

TEST(HashEmbedder, SaltChangesBuckets) {
  HashEmbedder a(64, 0), b(64, 12345);
  EXPECT_FALSE(a.embed_text("alpha beta gamma").isApprox(b.embed_text("alpha beta gamma")));
}

TEST(HashEmbedder, UnnormalizedCounts) {
  HashEmbedder e(8, 0, Normalization::none);
  const Vector v = e.embed_text("the the cat");
  EXPECT_EQ(v[4], 2.0);
  EXPECT_EQ(v[7], 1.0);
}

TEST(HashEmbedder, RejectsTinyDimension) { EXPECT_GRLP_ERROR(HashEmbedder(1), ErrorKind::argument); }

TEST(Embedder, ExampleIsComposedText) {
  HashEmbedder e(32);
  const auto ex = CandidateExample::make("Name a planet", "space quiz", "Mars");
  EXPECT_EQ(example_text(ex), "Name a planet\nspace quiz\nMars");
  EXPECT_EQ(e.embed_example(ex), e.embed_text("Name a planet\nspace quiz\nMars"));
  EXPECT_EQ(e.embed_example(CandidateExample::make("q", std::nullopt, "r")),
            e.embed_example(CandidateExample::make("q", "", "r")));
}

TEST(Cosine, Basics) {
  Vector u(2), v(2), z = Vector::Zero(2);
  u << 1, 0;
  v << 0, 1;
  EXPECT_EQ(cosine(u, v), 0.0);
  EXPECT_NEAR(cosine(u * 3.0, u), 1.0, 1e-15);
  EXPECT_EQ(cosine(z, u), 0.0);
  const Vector r = testing::random_matrix(3, 10, 1).col(0);
  EXPECT_NEAR(cosine(r, r), 1.0, 1e-15);
}

TEST(FileEmbedder, LoadsAndLooksUp) {
  const auto path = std::filesystem::temp_directory_path() / "grlp_vectors.jsonl";
  std::ofstream(path) << R"({"text":"a","vector":[3,4]})" << "\n" << R"({"text":"b","vector":[0,2]})" << "\n";
  FileEmbedder e(path, 2);
  EXPECT_EQ(e.size(), 2u);
  EXPECT_NEAR(e.embed_text("a")[0], 0.6, 1e-15);
  EXPECT_GRLP_ERROR(e.embed_text("c"), ErrorKind::lookup);
  EXPECT_GRLP_ERROR(FileEmbedder(path, 3), ErrorKind::shape);
  std::filesystem::remove(path);
}

TEST(MakeEmbedder, Hash) {
  EmbedderConfig cfg;
  cfg.dim = 12;
  const auto e = make_embedder(cfg);
  EXPECT_EQ(e->dim(), 12u);
}

}  // namespace
}  // namespace grlp
