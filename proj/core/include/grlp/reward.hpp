#pragma once

#include "grlp/embedder.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

/// Decodes UTF-8 into Unicode scalar values; malformed bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view text);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - levenshtein / max length, over scalar values; both empty gives 1.
double fuzzy_sim(std::string_view a, std::string_view a_hat);

/// Cosine of the two embeddings rescaled from [-1, 1] to [0, 1].
double embed_sim(std::string_view a, std::string_view a_hat, const Embedder& embedder);

struct RewardConfig {
  double lambda = 0.4;
  std::shared_ptr<const Embedder> embedder;

  void validate() const;
};

struct RewardBreakdown {
  double textual = 0.0;    // R_m
  double embedding = 0.0;  // R_e
  double total = 0.0;
};

RewardBreakdown reward_breakdown(std::string_view a, std::string_view a_hat, const RewardConfig& config);

/// lambda * fuzzy_sim + (1 - lambda) * embed_sim.
double reward(std::string_view a, std::string_view a_hat, const RewardConfig& config);

}  // namespace grlp
