#pragma once

#include "grlp/checkpoint.hpp"
#include "grlp/corpus.hpp"
#include "grlp/embedder.hpp"
#include "grlp/env.hpp"
#include "grlp/hgt.hpp"
#include "grlp/metrics.hpp"
#include "grlp/policy.hpp"
#include "grlp/promptgen.hpp"
#include "grlp/reward.hpp"
#include "grlp/rng.hpp"
#include "grlp/synthetic.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

enum class Variant { full, no_kg, knn_select };
enum class OptimizerKind { sgd, adam };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);  // accepts full, no-kg/no_kg, knn-select/knn_select

struct TrainConfig {
  std::size_t batch_size = 4;
  std::size_t epochs = 1;
  std::size_t max_steps = 0;  // overrides epochs when non-zero
  double learning_rate = 1e-2;
  OptimizerKind optimizer = OptimizerKind::sgd;
  bool use_baseline = true;
  double baseline_decay = 0.9;
  std::size_t k_max = 2;
  std::size_t knn_k = 2;
  std::uint64_t seed = 7;
  double lambda = 0.4;
  HgtConfig hgt;
  Variant variant = Variant::full;
  std::size_t rollout_threads = 1;

  void validate() const;
  /// Steps for a training set of `num_queries`.
  std::size_t total_steps(std::size_t num_queries) const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& json);

/// All learnable parameters: HGT encoder plus policy heads.
struct PolicyModel {
  HgtParams hgt;
  PolicyParams policy;

  PolicyModel zeros_like() const;
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
};

PolicyModel init_model(std::uint64_t seed, const HgtConfig& config);

std::vector<NamedTensor> export_tensors(const PolicyModel& model);
/// Copies checkpoint tensors into a model shaped by `config`; every tensor must match.
PolicyModel import_model(const Checkpoint& checkpoint, const HgtConfig& config);

enum class ActMode { greedy, sample };

/// Graph construction, encoding and action selection for one query against a
/// fixed pool. Candidate embeddings are computed once.
class PromptAgent {
 public:
  PromptAgent(TrainConfig config, std::vector<CandidateExample> pool, std::shared_ptr<const Embedder> embedder);

  struct Forward {
    PromptGraph graph;
    Matrix x;  // policy input: X^L, or X^0 for the no-KG variant
    std::optional<HgtTape> tape;
  };

  Forward forward(std::string_view query, const PolicyModel& model, bool traced) const;
  ActionSample act(const Forward& forward, const PolicyModel& model, ActMode mode, Rng* rng) const;

  /// Gradient of action.log_prob w.r.t. every model parameter.
  PolicyModel log_prob_grad(const Forward& forward, const PolicyModel& model, const ActionSample& action) const;

  std::vector<CandidateExample> sequence_examples(const ActionSample& action) const;

  const TrainConfig& config() const { return config_; }
  const std::vector<CandidateExample>& pool() const { return pool_; }
  const Embedder& embedder() const { return *embedder_; }

 private:
  TrainConfig config_;
  std::vector<CandidateExample> pool_;
  std::shared_ptr<const Embedder> embedder_;
  Matrix pool_rows_;
};

/// Top-k pool indices by cosine to the query row of X^0, most similar first.
ActionSample knn_action(const Matrix& x0, std::size_t k);

struct TrainRecord {
  std::uint64_t step = 0;
  std::size_t query_id = 0;
  std::vector<std::size_t> sequence;
  double reward = 0.0;
  double baseline = 0.0;
  double log_prob = 0.0;
  double loss = 0.0;  // -advantage * log_prob
  bool skipped = false;
  double wall_ms = 0.0;
};

/// One JSON line. Wall-clock is written only when `with_timing`, which keeps
/// default logs byte-identical across replays.
std::string to_json_line(const TrainRecord& record, bool with_timing = false);

/// Mean of the per-episode losses of each step, in step order.
std::vector<double> step_losses(const std::vector<TrainRecord>& records);

class Trainer {
 public:
  Trainer(TrainConfig config, TaskData data, std::shared_ptr<const Embedder> embedder,
          std::shared_ptr<const Environment> env, PromptTemplate tmpl = default_template());

  /// Runs one batch: rollouts, rewards, gradient, update.
  std::vector<TrainRecord> step();
  /// Steps until config.total_steps() is reached.
  std::vector<TrainRecord> run();

  Checkpoint checkpoint() const;
  void restore(const Checkpoint& checkpoint);

  /// Extra JSON stored under "run" in the checkpoint config.
  void set_run_metadata(nlohmann::json metadata) { run_metadata_ = std::move(metadata); }

  const PolicyModel& model() const { return model_; }
  const PromptAgent& agent() const { return agent_; }
  const TrainConfig& config() const { return config_; }
  std::uint64_t steps_done() const { return step_; }
  std::size_t total_steps() const;

  double baseline() const { return baseline_; }
  void set_baseline(double value);

  /// Ascent direction applied by the last step, before the learning rate.
  const PolicyModel& last_gradient() const { return last_gradient_; }

 private:
  void apply_update(const PolicyModel& gradient);

  TrainConfig config_;
  TaskData data_;
  std::shared_ptr<const Environment> env_;
  PromptTemplate template_;
  RewardConfig reward_config_;
  PromptAgent agent_;
  PolicyModel model_;
  PolicyModel last_gradient_;
  PolicyModel adam_m_;
  PolicyModel adam_v_;
  Rng rng_;
  std::uint64_t step_ = 0;
  double baseline_ = 0.0;
  bool baseline_ready_ = false;
  nlohmann::json run_metadata_ = nlohmann::json::object();
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TrainRecord> records;
};

TrainResult train(const TrainConfig& config, const TaskData& data, std::shared_ptr<const Embedder> embedder,
                  std::shared_ptr<const Environment> env, const PromptTemplate& tmpl = default_template());

struct EvalItem {
  std::string query;
  std::string expected;
  std::string response;
  std::vector<std::size_t> sequence;
  double reward = 0.0;
  ItemScores scores;
};

struct EvalResult {
  MetricReport report;
  double mean_reward = 0.0;
  std::vector<EvalItem> items;
};

EvalResult evaluate(const PolicyModel& model, const TrainConfig& config, const std::vector<CandidateExample>& pool,
                    const std::vector<CandidateExample>& split, std::shared_ptr<const Embedder> embedder,
                    const Environment& env, const PromptTemplate& tmpl = default_template(),
                    ActMode mode = ActMode::greedy, std::uint64_t seed = 0);

/// Loads the model described by the checkpoint's own config.
EvalResult evaluate(const Checkpoint& checkpoint, const std::vector<CandidateExample>& pool,
                    const std::vector<CandidateExample>& split, std::shared_ptr<const Embedder> embedder,
                    const Environment& env, const PromptTemplate& tmpl = default_template(),
                    ActMode mode = ActMode::greedy, std::uint64_t seed = 0);

nlohmann::json to_json(const EvalResult& result);

enum class SweepAxis { lambda, hgt_layers };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  std::string error;
  ItemScores corpus;
  double mean_reward = 0.0;
  std::size_t hgt_layers_in_checkpoint = 0;
  std::size_t tensor_count = 0;
};

std::vector<SweepRow> sweep(const TrainConfig& base, SweepAxis axis, const std::vector<double>& grid,
                            const TaskData& data, std::shared_ptr<const Embedder> embedder,
                            std::shared_ptr<const Environment> env, const PromptTemplate& tmpl = default_template());

nlohmann::json to_json(const std::vector<SweepRow>& rows, SweepAxis axis);

}  // namespace grlp
