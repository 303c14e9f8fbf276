#include "grlp/metrics.hpp"

#include "grlp/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace grlp {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& ref, const NgramCounts& cand) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

Prf make_prf(double recall, double precision) {
  Prf out{recall, precision, 0.0};
  if (recall + precision > 0.0) out.f1 = 2.0 * recall * precision / (recall + precision);
  return out;
}

}  // namespace

std::vector<std::string> metric_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string token;
  auto flush = [&] {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(token[e - 1]))) --e;
    if (e > b) tokens.push_back(token.substr(b, e - b));
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else {
      token.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

Prf rouge_n(std::string_view reference, std::string_view candidate, int n) {
  if (n != 1 && n != 2) throw Error(ErrorKind::argument, "rouge_n supports n = 1 or 2, got " + std::to_string(n));
  const auto ref = metric_tokens(reference);
  const auto cand = metric_tokens(candidate);
  const auto un = static_cast<std::size_t>(n);
  if (ref.size() < un || cand.size() < un) return ref == cand ? Prf{1.0, 1.0, 1.0} : Prf{};
  const auto overlap = static_cast<double>(clipped_overlap(ngrams(ref, un), ngrams(cand, un)));
  return make_prf(overlap / static_cast<double>(ref.size() - un + 1),
                  overlap / static_cast<double>(cand.size() - un + 1));
}

Prf rouge_l(std::string_view reference, std::string_view candidate) {
  const auto ref = metric_tokens(reference);
  const auto cand = metric_tokens(candidate);
  if (ref.empty() || cand.empty()) return ref == cand ? Prf{1.0, 1.0, 1.0} : Prf{};
  std::vector<std::size_t> prev(cand.size() + 1, 0);
  std::vector<std::size_t> cur(cand.size() + 1, 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    for (std::size_t j = 1; j <= cand.size(); ++j) {
      cur[j] = ref[i - 1] == cand[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[cand.size()]);
  return make_prf(lcs / static_cast<double>(ref.size()), lcs / static_cast<double>(cand.size()));
}

double bleu(std::string_view reference, std::string_view candidate) {
  constexpr std::size_t kMaxOrder = 4;
  const auto ref = metric_tokens(reference);
  const auto cand = metric_tokens(candidate);
  if (cand.empty() || ref.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const std::size_t total = cand.size() >= n ? cand.size() - n + 1 : 0;
    const std::size_t matched = clipped_overlap(ngrams(ref, n), ngrams(cand, n));
    const double precision = matched == 0 ? 1.0 / static_cast<double>(total + 1)
                                          : static_cast<double>(matched) / static_cast<double>(total);
    log_sum += std::log(precision);
  }
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum / static_cast<double>(kMaxOrder));
}

ItemScores score_item(std::string_view reference, std::string_view candidate) {
  return {rouge_n(reference, candidate, 1).f1, rouge_n(reference, candidate, 2).f1, rouge_l(reference, candidate).f1,
          bleu(reference, candidate)};
}

void MetricReport::add(const ItemScores& scores) { per_item.push_back(scores); }

void MetricReport::finalize() {
  empty = per_item.empty();
  corpus = {};
  if (empty) return;
  for (const auto& s : per_item) {
    corpus.rouge1 += s.rouge1;
    corpus.rouge2 += s.rouge2;
    corpus.rougeL += s.rougeL;
    corpus.bleu += s.bleu;
  }
  const auto n = static_cast<double>(per_item.size());
  corpus.rouge1 /= n;
  corpus.rouge2 /= n;
  corpus.rougeL /= n;
  corpus.bleu /= n;
}

nlohmann::json to_json(const ItemScores& scores) {
  return {{"rouge1", scores.rouge1}, {"rouge2", scores.rouge2}, {"rougeL", scores.rougeL}, {"bleu", scores.bleu}};
}

}  // namespace grlp
