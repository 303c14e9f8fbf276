#include "grlp/reward.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace grlp {
namespace {

// Embedder returning fixed vectors so embed_sim can be checked by hand.
class TableEmbedder final : public Embedder {
 public:
  std::size_t dim() const override { return 2; }
  EmbeddingVector embed_text(std::string_view text) const override {
    EmbeddingVector v(2);
    if (text == "x") v << 1, 0;
    else if (text == "y") v << 0, 1;
    else if (text == "-x") v << -1, 0;
    else v << 0, 0;
    return v;
  }
};

TEST(Levenshtein, ClassicCases) {
  EXPECT_EQ(levenshtein(U"kitten", U"sitting"), 3u);
  EXPECT_EQ(levenshtein(U"", U"abc"), 3u);
  EXPECT_EQ(levenshtein(U"flaw", U"lawn"), 2u);
  EXPECT_EQ(levenshtein(U"same", U"same"), 0u);
}

TEST(FuzzySim, Values) {
  EXPECT_NEAR(fuzzy_sim("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-15);
  EXPECT_EQ(fuzzy_sim("abc", ""), 0.0);
  EXPECT_EQ(fuzzy_sim("", ""), 1.0);
  // Counted in code points, not bytes.
  EXPECT_NEAR(fuzzy_sim("caf\xc3\xa9", "cafe"), 0.75, 1e-15);
  EXPECT_EQ(decode_utf8("\xff").size(), 1u);
}

TEST(EmbedSim, RescaledCosine) {
  TableEmbedder e;
  EXPECT_NEAR(embed_sim("x", "y", e), 0.5, 1e-15);
  EXPECT_NEAR(embed_sim("x", "zero", e), 0.5, 1e-15);
  EXPECT_NEAR(embed_sim("x", "x", e), 1.0, 1e-15);
  EXPECT_NEAR(embed_sim("x", "-x", e), 0.0, 1e-15);
}

TEST(Reward, Blend) {
  RewardConfig cfg{0.4, std::make_shared<TableEmbedder>()};
  // fuzzy("x","y") = 0, embed = 0.5.
  EXPECT_NEAR(reward("x", "y", cfg), 0.6 * 0.5, 1e-15);
  const auto b = reward_breakdown("x", "x", cfg);
  EXPECT_EQ(b.textual, 1.0);
  EXPECT_EQ(b.embedding, 1.0);
  EXPECT_EQ(b.total, 1.0);
  cfg.lambda = 1.0;
  EXPECT_NEAR(reward("kitten", "sitting", cfg), 4.0 / 7.0, 1e-15);
}

TEST(Reward, SelfSimilarityIsOne) {
  RewardConfig cfg{0.4, std::make_shared<HashEmbedder>(64)};
  for (const char* s : {"a", "Jupiter is big", "multi word answer with punctuation!"}) {
    EXPECT_NEAR(reward(s, s, cfg), 1.0, 1e-12) << s;
  }
}

TEST(Reward, BoundedInUnitInterval) {
  RewardConfig cfg{0.3, std::make_shared<HashEmbedder>(16)};
  Rng rng(5);
  const std::vector<std::string> words{"red", "blue", "green", "sky", "sea", "x"};
  for (int t = 0; t < 200; ++t) {
    std::string a, b;
    for (int k = 0; k < 4; ++k) a += words[rng.below(words.size())] + " ";
    for (int k = 0; k < 3; ++k) b += words[rng.below(words.size())] + " ";
    const double r = reward(a, b, cfg);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Reward, LambdaValidation) {
  RewardConfig cfg{1.5, std::make_shared<HashEmbedder>(8)};
  EXPECT_GRLP_ERROR(cfg.validate(), ErrorKind::argument);
  cfg.lambda = -0.1;
  EXPECT_GRLP_ERROR(reward("a", "b", cfg), ErrorKind::argument);
}

}  // namespace
}  // namespace grlp
