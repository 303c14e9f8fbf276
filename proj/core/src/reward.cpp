#include "grlp/reward.hpp"

#include "grlp/error.hpp"

#include <algorithm>
#include <numeric>

namespace grlp {

std::u32string decode_utf8(std::string_view text) {
  constexpr char32_t kReplacement = 0xFFFD;
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    // Reject overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (ok && (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double fuzzy_sim(std::string_view a, std::string_view a_hat) {
  const auto u = decode_utf8(a);
  const auto v = decode_utf8(a_hat);
  const std::size_t longest = std::max(u.size(), v.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(u, v)) / static_cast<double>(longest);
}

double embed_sim(std::string_view a, std::string_view a_hat, const Embedder& embedder) {
  return (cosine(embedder.embed_text(a), embedder.embed_text(a_hat)) + 1.0) / 2.0;
}

void RewardConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::argument, "lambda must lie in [0, 1]");
  if (!embedder) throw Error(ErrorKind::argument, "reward needs an embedder");
}

RewardBreakdown reward_breakdown(std::string_view a, std::string_view a_hat, const RewardConfig& config) {
  config.validate();
  RewardBreakdown r;
  r.textual = fuzzy_sim(a, a_hat);
  r.embedding = embed_sim(a, a_hat, *config.embedder);
  r.total = config.lambda * r.textual + (1.0 - config.lambda) * r.embedding;
  return r;
}

double reward(std::string_view a, std::string_view a_hat, const RewardConfig& config) {
  return reward_breakdown(a, a_hat, config).total;
}

}  // namespace grlp
