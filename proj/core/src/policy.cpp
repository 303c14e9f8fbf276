#include "grlp/policy.hpp"

#include "grlp/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace grlp {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) { return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

void check_dims(const Matrix& x, const PolicyParams& params) {
  if (x.rows() < 2) throw Error(ErrorKind::argument, "policy input needs at least one candidate and the query row");
  if (params.w.size() != x.cols() || params.w_m.rows() != x.cols() || params.w_m.cols() != x.cols()) {
    throw Error(ErrorKind::argument, "policy parameters do not match embedding width " + std::to_string(x.cols()));
  }
}

// Bilinear logit of inclusion for candidate row i.
double match_logit(const Matrix& x, const Matrix& w_m, Eigen::Index i) {
  const Eigen::Index q = x.rows() - 1;
  return (x.row(q) * w_m).dot(x.row(i)) / std::sqrt(static_cast<double>(x.cols()));
}

// s for the ordered pair (first -> second).
double pair_logit(const Matrix& x, const Vector& w, std::size_t first, std::size_t second) {
  const auto diff = (x.row(static_cast<Eigen::Index>(first)) - x.row(static_cast<Eigen::Index>(second))).array();
  return diff.sin().matrix().dot(w.transpose());
}

std::vector<std::size_t> selected_indices(const std::vector<std::uint8_t>& include) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < include.size(); ++i) {
    if (include[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

PolicyParams PolicyParams::zeros_like() const {
  return {Vector::Zero(w.size()), Matrix::Zero(w_m.rows(), w_m.cols())};
}

std::vector<TensorView> PolicyParams::tensors() { return {view_of("policy.w", w), view_of("policy.w_m", w_m)}; }

std::vector<ConstTensorView> PolicyParams::tensors() const {
  std::vector<ConstTensorView> out;
  for (auto& t : const_cast<PolicyParams*>(this)->tensors()) out.push_back({t.name, t.shape, t.values});
  return out;
}

PolicyParams init_policy_params(std::uint64_t seed, std::size_t dim) {
  if (dim < 1) throw Error(ErrorKind::argument, "policy dimension must be positive");
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(dim);
  PolicyParams p{Vector(d), Matrix(d, d)};
  const double s_w = std::sqrt(6.0 / static_cast<double>(dim + 1));
  for (Eigen::Index i = 0; i < d; ++i) p.w[i] = rng.uniform(-s_w, s_w);
  const double s_m = std::sqrt(6.0 / static_cast<double>(2 * dim));
  for (Eigen::Index i = 0; i < p.w_m.size(); ++i) p.w_m.data()[i] = rng.uniform(-s_m, s_m);
  return p;
}

double pair_score(const Vector& x_i, const Vector& x_j, const Vector& w) {
  if (x_i.size() != x_j.size() || x_i.size() != w.size()) {
    throw Error(ErrorKind::argument, "pair_score dimension mismatch");
  }
  const double s = (x_i - x_j).array().sin().matrix().dot(w);
  // e^s / (e^s + e^-s) == sigmoid(2s)
  return sigmoid(2.0 * s);
}

double match_prob(const Vector& x_q, const Vector& x_c, const Matrix& w_m) {
  if (x_q.size() != x_c.size() || w_m.rows() != x_q.size() || w_m.cols() != x_c.size()) {
    throw Error(ErrorKind::argument, "match_prob dimension mismatch");
  }
  return sigmoid(x_q.dot(w_m * x_c) / std::sqrt(static_cast<double>(x_q.size())));
}

Tournament::Tournament(std::size_t n) : n_(n), low_first_(n * (n > 0 ? n - 1 : 0) / 2, 1) {}

std::size_t Tournament::pair_index(std::size_t i, std::size_t j) const {
  // i < j
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

bool Tournament::precedes(std::size_t i, std::size_t j) const {
  if (i == j || i >= n_ || j >= n_) throw Error(ErrorKind::argument, "invalid tournament pair");
  return i < j ? low_first_[pair_index(i, j)] != 0 : low_first_[pair_index(j, i)] == 0;
}

void Tournament::orient(std::size_t first, std::size_t second) {
  if (first == second || first >= n_ || second >= n_) throw Error(ErrorKind::argument, "invalid tournament pair");
  if (first < second) {
    low_first_[pair_index(first, second)] = 1;
  } else {
    low_first_[pair_index(second, first)] = 0;
  }
}

std::vector<std::size_t> order_selected(const Tournament& tournament, const std::vector<std::size_t>& selected) {
  const std::size_t k = selected.size();
  // Kahn's algorithm; a tournament is acyclic iff every round has exactly one source.
  std::vector<std::size_t> indegree(k, 0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a != b && tournament.precedes(selected[b], selected[a])) ++indegree[a];
    }
  }
  std::vector<std::size_t> order;
  std::vector<bool> placed(k, false);
  bool acyclic = true;
  for (std::size_t round = 0; round < k && acyclic; ++round) {
    std::size_t source = k;
    for (std::size_t a = 0; a < k; ++a) {
      if (!placed[a] && indegree[a] == 0) {
        source = a;
        break;
      }
    }
    if (source == k) {
      acyclic = false;
      break;
    }
    placed[source] = true;
    order.push_back(selected[source]);
    for (std::size_t b = 0; b < k; ++b) {
      if (!placed[b] && tournament.precedes(selected[source], selected[b])) --indegree[b];
    }
  }
  if (acyclic) return order;

  // Copeland fallback: most wins first, lower index on ties.
  std::vector<std::pair<std::size_t, std::size_t>> wins;  // (wins, index)
  for (std::size_t a = 0; a < k; ++a) {
    std::size_t count = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a != b && tournament.precedes(selected[a], selected[b])) ++count;
    }
    wins.emplace_back(count, selected[a]);
  }
  std::sort(wins.begin(), wins.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first > r.first : l.second < r.second;
  });
  order.clear();
  for (const auto& [count, index] : wins) order.push_back(index);
  return order;
}

std::vector<double> inclusion_probs(const Matrix& x, const PolicyParams& params) {
  check_dims(x, params);
  std::vector<double> probs(static_cast<std::size_t>(x.rows() - 1));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = sigmoid(match_logit(x, params.w_m, static_cast<Eigen::Index>(i)));
  }
  return probs;
}

std::vector<std::uint8_t> repair_inclusion(std::vector<std::uint8_t> include, const std::vector<double>& probs,
                                           std::size_t k_max) {
  if (k_max < 1) throw Error(ErrorKind::argument, "k_max must be at least 1");
  if (include.size() != probs.size() || include.empty()) {
    throw Error(ErrorKind::argument, "inclusion vector and probabilities disagree in size");
  }
  auto more_probable = [&](std::size_t a, std::size_t b) { return probs[a] != probs[b] ? probs[a] > probs[b] : a < b; };
  std::vector<std::size_t> chosen = selected_indices(include);
  if (chosen.empty()) {
    std::vector<std::size_t> all(probs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    include[*std::min_element(all.begin(), all.end(), more_probable)] = 1;
  } else if (chosen.size() > k_max) {
    std::sort(chosen.begin(), chosen.end(), more_probable);
    for (std::size_t r = k_max; r < chosen.size(); ++r) include[chosen[r]] = 0;
  }
  return include;
}

double action_log_prob(const Matrix& x, const PolicyParams& params, const std::vector<std::uint8_t>& drawn,
                       const std::vector<std::uint8_t>& include, const Tournament& tournament) {
  check_dims(x, params);
  const std::size_t n = static_cast<std::size_t>(x.rows() - 1);
  if (drawn.size() != n || include.size() != n || tournament.size() != n) {
    throw Error(ErrorKind::argument, "action does not match the number of candidates");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = match_logit(x, params.w_m, static_cast<Eigen::Index>(i));
    total += drawn[i] ? log_sigmoid(a) : log_sigmoid(-a);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!include[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!include[j]) continue;
      const bool i_first = tournament.precedes(i, j);
      total += log_sigmoid(2.0 * pair_logit(x, params.w, i_first ? i : j, i_first ? j : i));
    }
  }
  return total;
}

ActionSample make_action(const Matrix& x, const PolicyParams& params, std::vector<std::uint8_t> drawn,
                         Tournament tournament, std::size_t k_max) {
  const auto probs = inclusion_probs(x, params);
  ActionSample action;
  action.include = repair_inclusion(drawn, probs, k_max);
  action.drawn = std::move(drawn);
  action.tournament = std::move(tournament);
  action.sequence = order_selected(action.tournament, selected_indices(action.include));
  action.log_prob = action_log_prob(x, params, action.drawn, action.include, action.tournament);
  return action;
}

ActionSample sample_action(const Matrix& x, const PolicyParams& params, std::size_t k_max, Rng& rng) {
  const auto probs = inclusion_probs(x, params);
  const std::size_t n = probs.size();
  std::vector<std::uint8_t> drawn(n);
  for (std::size_t i = 0; i < n; ++i) drawn[i] = rng.bernoulli(probs[i]) ? 1 : 0;
  Tournament tournament(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p_ij = sigmoid(2.0 * pair_logit(x, params.w, i, j));
      if (rng.bernoulli(p_ij)) {
        tournament.orient(i, j);
      } else {
        tournament.orient(j, i);
      }
    }
  }
  return make_action(x, params, std::move(drawn), std::move(tournament), k_max);
}

ActionSample greedy_action(const Matrix& x, const PolicyParams& params, std::size_t k_max) {
  const auto probs = inclusion_probs(x, params);
  const std::size_t n = probs.size();
  std::vector<std::uint8_t> drawn(n);
  for (std::size_t i = 0; i < n; ++i) drawn[i] = probs[i] >= 0.5 ? 1 : 0;
  Tournament tournament(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // ps(i, j) >= ps(j, i)  <=>  s_ij >= 0; ties keep the lower index first.
      if (pair_logit(x, params.w, i, j) >= 0.0) {
        tournament.orient(i, j);
      } else {
        tournament.orient(j, i);
      }
    }
  }
  return make_action(x, params, std::move(drawn), std::move(tournament), k_max);
}

PolicyGradients action_log_prob_grad(const Matrix& x, const PolicyParams& params, const ActionSample& action) {
  check_dims(x, params);
  const std::size_t n = static_cast<std::size_t>(x.rows() - 1);
  if (action.drawn.size() != n || action.include.size() != n || action.tournament.size() != n) {
    throw Error(ErrorKind::argument, "action does not match the number of candidates");
  }
  const auto q = static_cast<Eigen::Index>(n);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(x.cols()));

  PolicyGradients g{params.zeros_like(), Matrix::Zero(x.rows(), x.cols())};
  const RowVector q_w = x.row(q) * params.w_m;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ir = static_cast<Eigen::Index>(i);
    const double p = sigmoid(match_logit(x, params.w_m, ir));
    const double c = (action.drawn[i] ? 1.0 : 0.0) - p;  // d log-likelihood / d logit
    const double scale = c * inv_sqrt_d;
    g.params.w_m.noalias() += scale * x.row(q).transpose() * x.row(ir);
    g.x.row(q).noalias() += scale * x.row(ir) * params.w_m.transpose();
    g.x.row(ir) += scale * q_w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!action.include[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!action.include[j]) continue;
      const bool i_first = action.tournament.precedes(i, j);
      const auto f = static_cast<Eigen::Index>(i_first ? i : j);
      const auto s = static_cast<Eigen::Index>(i_first ? j : i);
      const RowVector diff = x.row(f) - x.row(s);
      const double z = 2.0 * diff.array().sin().matrix().dot(params.w.transpose());
      const double coef = 2.0 * (1.0 - sigmoid(z));
      g.params.w += coef * diff.array().sin().matrix().transpose();
      const RowVector d_diff = coef * (diff.array().cos() * params.w.transpose().array()).matrix();
      g.x.row(f) += d_diff;
      g.x.row(s) -= d_diff;
    }
  }
  return g;
}

}  // namespace grlp
