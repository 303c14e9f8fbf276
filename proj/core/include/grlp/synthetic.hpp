#pragma once

#include "grlp/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace grlp {

/// Pool, training queries and held-out queries for one experiment.
struct TaskData {
  std::vector<CandidateExample> pool;
  std::vector<CandidateExample> train;
  std::vector<CandidateExample> eval;
};

struct SyntheticTaskOptions {
  std::size_t num_queries = 100;
  std::size_t num_eval = 40;
  std::uint64_t seed = 7;
};

/// Six-example pool: three targets with disjoint vocabularies plus three
/// distractors. Every query repeats one target's instruction (with a filler
/// word appended) and expects that target's response, so the best action is
/// to include the matching target.
TaskData make_synthetic_task(const SyntheticTaskOptions& options = {});

/// Index in `pool` of the target whose response `expected` is; pool.size() if none.
std::size_t matching_candidate(const std::vector<CandidateExample>& pool, const CandidateExample& query);

}  // namespace grlp
