#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace grlp {

/// Lowercase, split on whitespace, strip ASCII punctuation from token edges.
std::vector<std::string> metric_tokens(std::string_view text);

struct Prf {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

Prf rouge_n(std::string_view reference, std::string_view candidate, int n);
Prf rouge_l(std::string_view reference, std::string_view candidate);

/// Single-reference BLEU-4: geometric mean of clipped n-gram precisions with
/// add-one smoothing on zero matches, times the brevity penalty.
double bleu(std::string_view reference, std::string_view candidate);

struct ItemScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double bleu = 0.0;
};

ItemScores score_item(std::string_view reference, std::string_view candidate);

struct MetricReport {
  std::vector<ItemScores> per_item;
  ItemScores corpus;
  bool empty = true;

  void add(const ItemScores& scores);
  /// Recomputes corpus means from per_item; call after the last add().
  void finalize();
};

nlohmann::json to_json(const ItemScores& scores);

}  // namespace grlp
