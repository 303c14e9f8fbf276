#pragma once

#include "grlp/rng.hpp"
#include "grlp/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace grlp {

struct PolicyParams {
  Vector w;      // pairwise edge classifier, length dim
  Matrix w_m;    // in-context matching network, dim x dim

  PolicyParams zeros_like() const;

  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
};

PolicyParams init_policy_params(std::uint64_t seed, std::size_t dim);

/// ps(x_i, x_j) = e^s / (e^s + e^-s) with s = sin(x_i - x_j) . w.
double pair_score(const Vector& x_i, const Vector& x_j, const Vector& w);

/// sigmoid(x_q W_m x_c^T / sqrt(d)).
double match_prob(const Vector& x_q, const Vector& x_c, const Matrix& w_m);

/// Orientation of every unordered candidate pair.
class Tournament {
 public:
  Tournament() = default;
  explicit Tournament(std::size_t n);

  std::size_t size() const { return n_; }

  /// True when i is placed before j.
  bool precedes(std::size_t i, std::size_t j) const;
  void orient(std::size_t first, std::size_t second);

  friend bool operator==(const Tournament&, const Tournament&) = default;

 private:
  std::size_t pair_index(std::size_t i, std::size_t j) const;

  std::size_t n_ = 0;
  std::vector<std::uint8_t> low_first_;  // per pair i < j: 1 when i -> j
};

/// Unique topological order when the restricted tournament is acyclic;
/// otherwise descending win count with ascending index breaking ties.
std::vector<std::size_t> order_selected(const Tournament& tournament, const std::vector<std::size_t>& selected);

struct ActionSample {
  std::vector<std::uint8_t> drawn;    // inclusion draw before repair
  std::vector<std::uint8_t> include;  // after repair
  Tournament tournament;
  std::vector<std::size_t> sequence;
  double log_prob = 0.0;
};

/// Per-candidate inclusion probabilities; X holds N candidate rows then the query row.
std::vector<double> inclusion_probs(const Matrix& x, const PolicyParams& params);

/// Enforces 1 <= |include| <= k_max: empty draws take the most probable
/// candidate, oversized draws keep the k_max most probable (lower index on ties).
std::vector<std::uint8_t> repair_inclusion(std::vector<std::uint8_t> include, const std::vector<double>& probs,
                                           std::size_t k_max);

/// Log-probability of the drawn inclusion vector plus the pair terms of
/// every pair that is co-selected after repair.
double action_log_prob(const Matrix& x, const PolicyParams& params, const std::vector<std::uint8_t>& drawn,
                       const std::vector<std::uint8_t>& include, const Tournament& tournament);

ActionSample sample_action(const Matrix& x, const PolicyParams& params, std::size_t k_max, Rng& rng);

ActionSample greedy_action(const Matrix& x, const PolicyParams& params, std::size_t k_max);

/// Assembles an action from an explicit draw (used by enumeration and replay).
ActionSample make_action(const Matrix& x, const PolicyParams& params, std::vector<std::uint8_t> drawn,
                         Tournament tournament, std::size_t k_max);

struct PolicyGradients {
  PolicyParams params;
  Matrix x;  // d(log_prob)/d(X), same shape as X
};

/// Exact gradient of action.log_prob. The action must come from this X.
PolicyGradients action_log_prob_grad(const Matrix& x, const PolicyParams& params, const ActionSample& action);

}  // namespace grlp
