#include "grlp/synthetic.hpp"

#include "grlp/error.hpp"
#include "grlp/rng.hpp"

#include <array>

namespace grlp {
namespace {

struct Seed {
  const char* query;
  const char* context;
  const char* response;
};

constexpr std::array<Seed, 6> kPool{{
    {"Name the largest planet in our solar system", nullptr,
     "Jupiter is the biggest planet orbiting our sun and hosts a giant red storm"},
    {"Give one recipe step for baking sourdough bread", "home kitchen",
     "Mix flour water salt and starter then knead dough and let it rise overnight"},
    {"Explain how to reverse a linked list in code", nullptr,
     "Walk nodes keeping previous current next pointers flipping each link backwards"},
    {"Translate hello into French", nullptr, "Bonjour"},
    {"List three primary colors", nullptr, "Red yellow blue"},
    {"What is the boiling point of water at sea level", nullptr, "One hundred degrees celsius"},
}};

constexpr std::size_t kTargets = 3;

constexpr std::array<const char*, 8> kFillers{"please", "now", "today", "quickly",
                                              "briefly", "again", "kindly", "thanks"};

}  // namespace

TaskData make_synthetic_task(const SyntheticTaskOptions& options) {
  if (options.num_eval > options.num_queries) {
    throw Error(ErrorKind::argument, "held-out count exceeds the number of synthetic queries");
  }
  TaskData data;
  for (const auto& s : kPool) {
    data.pool.push_back(CandidateExample::make(s.query, s.context ? std::optional<std::string>(s.context) : std::nullopt,
                                               s.response));
  }
  Rng rng(mix_seed(options.seed, 0x5e));
  const std::size_t num_train = options.num_queries - options.num_eval;
  for (std::size_t i = 0; i < options.num_queries; ++i) {
    const auto& target = data.pool[i % kTargets];
    std::string query = target.query + " " + kFillers[rng.below(kFillers.size())];
    auto example = CandidateExample::make(std::move(query), std::nullopt, target.response);
    (i < num_train ? data.train : data.eval).push_back(std::move(example));
  }
  return data;
}

std::size_t matching_candidate(const std::vector<CandidateExample>& pool, const CandidateExample& query) {
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].response == query.response) return i;
  }
  return pool.size();
}

}  // namespace grlp
