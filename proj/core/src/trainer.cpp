#include "grlp/trainer.hpp"

#include "grlp/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

namespace grlp {
namespace {

constexpr std::string_view kAdamM = "adam.m.";
constexpr std::string_view kAdamV = "adam.v.";

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

template <typename F>
void for_each_pair(PolicyModel& a, const PolicyModel& b, F&& f) {
  auto ta = a.tensors();
  auto tb = b.tensors();
  for (std::size_t k = 0; k < ta.size(); ++k) {
    for (std::size_t i = 0; i < ta[k].values.size(); ++i) f(ta[k].values[i], tb[k].values[i]);
  }
}

void axpy(PolicyModel& acc, double a, const PolicyModel& g) {
  for_each_pair(acc, g, [a](double& x, double y) { x += a * y; });
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw Error(ErrorKind::config, "unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

std::vector<NamedTensor> to_named(const std::vector<ConstTensorView>& views, std::string_view prefix) {
  std::vector<NamedTensor> out;
  out.reserve(views.size());
  for (const auto& v : views) {
    NamedTensor t;
    t.name = std::string(prefix) + v.name;
    t.shape.assign(v.shape.begin(), v.shape.end());
    t.values.assign(v.values.begin(), v.values.end());
    out.push_back(std::move(t));
  }
  return out;
}

void load_into(std::vector<TensorView> views, const Checkpoint& cp, std::string_view prefix) {
  for (auto& v : views) {
    const std::string name = std::string(prefix) + v.name;
    const NamedTensor* t = cp.find(name);
    if (!t) throw Error(ErrorKind::shape, "checkpoint is missing tensor '" + name + "'");
    if (!std::equal(t->shape.begin(), t->shape.end(), v.shape.begin(), v.shape.end())) {
      throw Error(ErrorKind::shape, "checkpoint tensor '" + name + "' has the wrong shape");
    }
    std::copy(t->values.begin(), t->values.end(), v.values.begin());
  }
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::full: return "full";
    case Variant::no_kg: return "no-kg";
    case Variant::knn_select: return "knn-select";
  }
  return "full";
}

Variant parse_variant(std::string_view name) {
  if (name == "full") return Variant::full;
  if (name == "no-kg" || name == "no_kg") return Variant::no_kg;
  if (name == "knn-select" || name == "knn_select") return Variant::knn_select;
  throw Error(ErrorKind::config,
              "unknown variant '" + std::string(name) + "' (expected full, no-kg or knn-select)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorKind::config, "batch_size must be at least 1");
  if (max_steps == 0 && epochs < 1) throw Error(ErrorKind::config, "epochs must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::config, "learning_rate must be a positive finite number");
  }
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw Error(ErrorKind::config, "baseline_decay must be in [0, 1)");
  }
  if (k_max < 1) throw Error(ErrorKind::config, "k_max must be at least 1");
  if (knn_k < 1) throw Error(ErrorKind::config, "knn_k must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::config, "lambda must be in [0, 1]");
  if (rollout_threads < 1) throw Error(ErrorKind::config, "rollout_threads must be at least 1");
  hgt.validate();
}

std::size_t TrainConfig::total_steps(std::size_t num_queries) const {
  if (max_steps > 0) return max_steps;
  return epochs * ((num_queries + batch_size - 1) / batch_size);
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"max_steps", c.max_steps},
          {"learning_rate", c.learning_rate},
          {"optimizer", std::string(to_string(c.optimizer))},
          {"use_baseline", c.use_baseline},
          {"baseline_decay", c.baseline_decay},
          {"k_max", c.k_max},
          {"knn_k", c.knn_k},
          {"seed", c.seed},
          {"lambda", c.lambda},
          {"hgt",
           {{"dim", c.hgt.dim}, {"heads", c.hgt.heads}, {"layers", c.hgt.layers}, {"mlp_depth", c.hgt.mlp_depth}}},
          {"variant", std::string(to_string(c.variant))},
          {"rollout_threads", c.rollout_threads}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "training config must be a JSON object");
  static const std::set<std::string> known{"batch_size", "epochs", "max_steps", "learning_rate", "optimizer",
                                           "use_baseline", "baseline_decay", "k_max", "knn_k", "seed",
                                           "lambda", "hgt", "variant", "rollout_threads"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw Error(ErrorKind::config, "unknown training config key '" + key + "'");
  }
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.optimizer = parse_optimizer(j.value("optimizer", std::string("sgd")));
    c.use_baseline = j.value("use_baseline", c.use_baseline);
    c.baseline_decay = j.value("baseline_decay", c.baseline_decay);
    c.k_max = j.value("k_max", c.k_max);
    c.knn_k = j.value("knn_k", c.knn_k);
    c.seed = j.value("seed", c.seed);
    c.lambda = j.value("lambda", c.lambda);
    c.variant = parse_variant(j.value("variant", std::string("full")));
    c.rollout_threads = j.value("rollout_threads", c.rollout_threads);
    if (j.contains("hgt")) {
      const auto& h = j.at("hgt");
      c.hgt.dim = h.value("dim", c.hgt.dim);
      c.hgt.heads = h.value("heads", c.hgt.heads);
      c.hgt.layers = h.value("layers", c.hgt.layers);
      c.hgt.mlp_depth = h.value("mlp_depth", c.hgt.mlp_depth);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::config, std::string("bad training config: ") + e.what());
  }
  c.validate();
  return c;
}

PolicyModel PolicyModel::zeros_like() const { return {hgt.zeros_like(), policy.zeros_like()}; }

std::vector<TensorView> PolicyModel::tensors() {
  auto out = hgt.tensors();
  for (auto& t : policy.tensors()) out.push_back(std::move(t));
  return out;
}

std::vector<ConstTensorView> PolicyModel::tensors() const {
  auto out = hgt.tensors();
  for (auto& t : policy.tensors()) out.push_back(std::move(t));
  return out;
}

PolicyModel init_model(std::uint64_t seed, const HgtConfig& config) {
  config.validate();
  return {init_hgt_params(mix_seed(seed, 1), config), init_policy_params(mix_seed(seed, 2), config.dim)};
}

std::vector<NamedTensor> export_tensors(const PolicyModel& model) { return to_named(model.tensors(), ""); }

PolicyModel import_model(const Checkpoint& checkpoint, const HgtConfig& config) {
  PolicyModel model = init_model(0, config);
  auto views = model.tensors();
  std::set<std::string> expected;
  for (const auto& v : views) expected.insert(v.name);
  for (const auto& t : checkpoint.tensors) {
    if (starts_with(t.name, kAdamM) || starts_with(t.name, kAdamV)) continue;
    if (!expected.count(t.name)) {
      throw Error(ErrorKind::shape, "checkpoint tensor '" + t.name + "' does not belong to this model shape");
    }
  }
  load_into(std::move(views), checkpoint, "");
  return model;
}

// ---------------------------------------------------------------------------

PromptAgent::PromptAgent(TrainConfig config, std::vector<CandidateExample> pool,
                         std::shared_ptr<const Embedder> embedder)
    : config_(std::move(config)), pool_(std::move(pool)), embedder_(std::move(embedder)) {
  if (!embedder_) throw Error(ErrorKind::argument, "agent needs an embedder");
  if (pool_.empty()) throw Error(ErrorKind::empty_dataset, "candidate pool is empty");
  if (embedder_->dim() != config_.hgt.dim) {
    std::ostringstream msg;
    msg << "embedder dimension " << embedder_->dim() << " does not match model dimension " << config_.hgt.dim;
    throw Error(ErrorKind::config, msg.str());
  }
  pool_rows_ = embed_pool(pool_, *embedder_);
}

PromptAgent::Forward PromptAgent::forward(std::string_view query, const PolicyModel& model, bool traced) const {
  if (query.empty()) throw Error(ErrorKind::argument, "query text is empty");
  Forward f{build_graph(pool_rows_, embedder_->embed_text(query)), Matrix(), std::nullopt};
  if (config_.variant != Variant::full) {
    f.x = f.graph.embeddings();
  } else if (traced) {
    auto enc = encode_traced(f.graph, model.hgt);
    f.x = std::move(enc.output);
    f.tape = std::move(enc.tape);
  } else {
    f.x = encode(f.graph, model.hgt);
  }
  return f;
}

ActionSample PromptAgent::act(const Forward& forward, const PolicyModel& model, ActMode mode, Rng* rng) const {
  if (config_.variant == Variant::knn_select) return knn_action(forward.graph.embeddings(), config_.knn_k);
  if (mode == ActMode::greedy) return greedy_action(forward.x, model.policy, config_.k_max);
  if (!rng) throw Error(ErrorKind::argument, "sampling needs a random generator");
  return sample_action(forward.x, model.policy, config_.k_max, *rng);
}

PolicyModel PromptAgent::log_prob_grad(const Forward& forward, const PolicyModel& model,
                                       const ActionSample& action) const {
  PolicyModel g = model.zeros_like();
  if (config_.variant == Variant::knn_select) return g;
  auto pg = action_log_prob_grad(forward.x, model.policy, action);
  g.policy = std::move(pg.params);
  if (config_.variant == Variant::full) {
    if (!forward.tape) throw Error(ErrorKind::argument, "gradient through the encoder needs a traced forward pass");
    g.hgt = backward(forward.graph, model.hgt, *forward.tape, pg.x).params;
  }
  return g;
}

std::vector<CandidateExample> PromptAgent::sequence_examples(const ActionSample& action) const {
  std::vector<CandidateExample> out;
  out.reserve(action.sequence.size());
  for (auto i : action.sequence) out.push_back(pool_.at(i));
  return out;
}

ActionSample knn_action(const Matrix& x0, std::size_t k) {
  if (x0.rows() < 2) throw Error(ErrorKind::argument, "graph has no candidates");
  const std::size_t n = static_cast<std::size_t>(x0.rows()) - 1;
  const Vector q = x0.row(static_cast<Eigen::Index>(n)).transpose();
  std::vector<double> sims(n);
  for (std::size_t i = 0; i < n; ++i) sims[i] = cosine(x0.row(static_cast<Eigen::Index>(i)).transpose(), q);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  order.resize(std::min(k, n));

  ActionSample a;
  a.include.assign(n, 0);
  for (auto i : order) a.include[i] = 1;
  a.drawn = a.include;
  a.tournament = Tournament(n);
  std::vector<std::size_t> rank(n, n);
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rank[j] < rank[i]) a.tournament.orient(j, i);
      else a.tournament.orient(i, j);
    }
  }
  a.sequence = order;
  return a;
}

std::string to_json_line(const TrainRecord& r, bool with_timing) {
  nlohmann::json j{{"step", r.step},         {"query_id", r.query_id}, {"sequence", r.sequence},
                   {"reward", r.reward},     {"baseline", r.baseline}, {"log_prob", r.log_prob},
                   {"loss", r.loss},         {"skipped", r.skipped}};
  if (with_timing) j["wall_ms"] = r.wall_ms;
  return j.dump();
}

std::vector<double> step_losses(const std::vector<TrainRecord>& records) {
  std::vector<double> out;
  std::uint64_t current = 0;
  double sum = 0.0;
  std::size_t count = 0;
  auto flush = [&] {
    if (count > 0) out.push_back(sum / static_cast<double>(count));
  };
  for (const auto& r : records) {
    if (r.step != current) {
      flush();
      current = r.step;
      sum = 0.0;
      count = 0;
    }
    if (r.skipped) continue;
    sum += r.loss;
    ++count;
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(TrainConfig config, TaskData data, std::shared_ptr<const Embedder> embedder,
                 std::shared_ptr<const Environment> env, PromptTemplate tmpl)
    : config_((config.validate(), std::move(config))),
      data_(std::move(data)),
      env_(std::move(env)),
      template_(std::move(tmpl)),
      reward_config_{config_.lambda, embedder},
      agent_(config_, data_.pool, embedder),
      model_(init_model(config_.seed, config_.hgt)),
      last_gradient_(model_.zeros_like()),
      adam_m_(model_.zeros_like()),
      adam_v_(model_.zeros_like()),
      rng_(mix_seed(config_.seed, 3)) {
  if (!env_) throw Error(ErrorKind::argument, "trainer needs an environment");
  if (data_.train.empty()) throw Error(ErrorKind::empty_dataset, "training split is empty");
  template_.validate();
  reward_config_.validate();
}

std::size_t Trainer::total_steps() const { return config_.total_steps(data_.train.size()); }

void Trainer::set_baseline(double value) {
  baseline_ = value;
  baseline_ready_ = true;
}

std::vector<TrainRecord> Trainer::step() {
  struct Episode {
    std::size_t query_id = 0;
    std::optional<PromptAgent::Forward> forward;
    ActionSample action;
    std::string prompt;
    std::optional<CompletionResponse> response;
    double reward = 0.0;
    double wall_ms = 0.0;
  };
  const std::size_t m = config_.batch_size;
  std::vector<Episode> episodes(m);
  const bool learns = config_.variant != Variant::knn_select;
  const bool traced = config_.variant == Variant::full;

  for (auto& e : episodes) {
    const auto start = std::chrono::steady_clock::now();
    e.query_id = rng_.below(data_.train.size());
    const auto& q = data_.train[e.query_id];
    e.forward = agent_.forward(q.query, model_, traced);
    e.action = agent_.act(*e.forward, model_, ActMode::sample, &rng_);
    e.prompt = render_prompt(agent_.sequence_examples(e.action), q.query, template_);
    e.wall_ms = elapsed_ms(start);
  }

  // A failed completion is retried once; a second failure drops the episode.
  auto rollout = [this](Episode& e) {
    const auto start = std::chrono::steady_clock::now();
    CompletionRequest req;
    req.prompt = e.prompt;
    for (int attempt = 0; attempt < 2 && !e.response; ++attempt) {
      try {
        e.response = env_->complete(req);
      } catch (const Error&) {
      }
    }
    if (e.response) e.reward = reward(data_.train[e.query_id].response, e.response->text, reward_config_);
    e.wall_ms += elapsed_ms(start);
  };
  if (config_.rollout_threads <= 1) {
    for (auto& e : episodes) rollout(e);
  } else {
    for (std::size_t begin = 0; begin < m; begin += config_.rollout_threads) {
      const std::size_t end = std::min(m, begin + config_.rollout_threads);
      std::vector<std::future<void>> jobs;
      for (std::size_t i = begin; i < end; ++i) jobs.push_back(std::async(std::launch::async, rollout, std::ref(episodes[i])));
      for (auto& j : jobs) j.get();
    }
  }

  const double b = config_.use_baseline && baseline_ready_ ? baseline_ : 0.0;
  PolicyModel grad = model_.zeros_like();
  std::size_t used = 0;
  double reward_sum = 0.0;
  std::vector<TrainRecord> records;
  records.reserve(m);
  for (auto& e : episodes) {
    TrainRecord r;
    r.step = step_ + 1;
    r.query_id = e.query_id;
    r.sequence = e.action.sequence;
    r.baseline = b;
    r.log_prob = e.action.log_prob;
    r.wall_ms = e.wall_ms;
    if (!e.response) {
      r.skipped = true;
      records.push_back(std::move(r));
      continue;
    }
    r.reward = e.reward;
    ++used;
    reward_sum += e.reward;
    if (learns) {
      const double adv = e.reward - b;
      r.loss = -adv * e.action.log_prob;
      axpy(grad, adv, agent_.log_prob_grad(*e.forward, model_, e.action));
    }
    records.push_back(std::move(r));
  }

  if (used > 0 && learns) {
    const double scale = 1.0 / static_cast<double>(used);
    for (auto& t : grad.tensors()) {
      for (double& v : t.values) {
        v *= scale;
        if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "non-finite gradient in '" + t.name + "'");
      }
    }
    apply_update(grad);
  }
  last_gradient_ = std::move(grad);

  if (config_.use_baseline && used > 0) {
    const double mean = reward_sum / static_cast<double>(used);
    if (!baseline_ready_) {
      baseline_ = mean;
      baseline_ready_ = true;
    } else {
      baseline_ = config_.baseline_decay * baseline_ + (1.0 - config_.baseline_decay) * mean;
    }
  }
  ++step_;
  return records;
}

void Trainer::apply_update(const PolicyModel& g) {
  const double lr = config_.learning_rate;
  if (config_.optimizer == OptimizerKind::sgd) {
    axpy(model_, lr, g);
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double t = static_cast<double>(step_ + 1);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  auto theta = model_.tensors();
  auto m = adam_m_.tensors();
  auto v = adam_v_.tensors();
  auto gt = g.tensors();
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t i = 0; i < theta[k].values.size(); ++i) {
      const double gi = gt[k].values[i];
      m[k].values[i] = beta1 * m[k].values[i] + (1.0 - beta1) * gi;
      v[k].values[i] = beta2 * v[k].values[i] + (1.0 - beta2) * gi * gi;
      theta[k].values[i] += lr * (m[k].values[i] / c1) / (std::sqrt(v[k].values[i] / c2) + eps);
    }
  }
}

std::vector<TrainRecord> Trainer::run() {
  std::vector<TrainRecord> all;
  const std::size_t total = total_steps();
  while (step_ < total) {
    auto batch = step();
    all.insert(all.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
  }
  return all;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint cp;
  cp.config = {{"train", to_json(config_)}, {"run", run_metadata_}};
  cp.step = step_;
  cp.rng_state = rng_.state();
  cp.baseline = baseline_;
  cp.baseline_ready = baseline_ready_;
  cp.tensors = export_tensors(model_);
  if (config_.optimizer == OptimizerKind::adam) {
    for (auto& t : to_named(adam_m_.tensors(), kAdamM)) cp.tensors.push_back(std::move(t));
    for (auto& t : to_named(adam_v_.tensors(), kAdamV)) cp.tensors.push_back(std::move(t));
  }
  return cp;
}

void Trainer::restore(const Checkpoint& cp) {
  if (!cp.config.contains("train") || cp.config.at("train") != to_json(config_)) {
    throw Error(ErrorKind::config, "checkpoint was written with a different training config");
  }
  model_ = import_model(cp, config_.hgt);
  if (config_.optimizer == OptimizerKind::adam) {
    load_into(adam_m_.tensors(), cp, kAdamM);
    load_into(adam_v_.tensors(), cp, kAdamV);
  }
  rng_.restore(cp.rng_state);
  step_ = cp.step;
  baseline_ = cp.baseline;
  baseline_ready_ = cp.baseline_ready;
  if (cp.config.contains("run")) run_metadata_ = cp.config.at("run");
}

TrainResult train(const TrainConfig& config, const TaskData& data, std::shared_ptr<const Embedder> embedder,
                  std::shared_ptr<const Environment> env, const PromptTemplate& tmpl) {
  Trainer trainer(config, data, std::move(embedder), std::move(env), tmpl);
  auto records = trainer.run();
  return {trainer.checkpoint(), std::move(records)};
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const PolicyModel& model, const TrainConfig& config, const std::vector<CandidateExample>& pool,
                    const std::vector<CandidateExample>& split, std::shared_ptr<const Embedder> embedder,
                    const Environment& env, const PromptTemplate& tmpl, ActMode mode, std::uint64_t seed) {
  RewardConfig rc{config.lambda, embedder};
  rc.validate();
  PromptAgent agent(config, pool, std::move(embedder));
  Rng rng(seed);
  EvalResult result;
  double reward_sum = 0.0;
  for (const auto& item : split) {
    auto f = agent.forward(item.query, model, false);
    auto action = agent.act(f, model, mode, &rng);
    CompletionRequest req;
    req.prompt = render_prompt(agent.sequence_examples(action), item.query, tmpl);
    auto resp = env.complete(req);
    EvalItem e;
    e.query = item.query;
    e.expected = item.response;
    e.response = std::move(resp.text);
    e.sequence = action.sequence;
    e.reward = reward(e.expected, e.response, rc);
    e.scores = score_item(e.expected, e.response);
    reward_sum += e.reward;
    result.report.add(e.scores);
    result.items.push_back(std::move(e));
  }
  result.report.finalize();
  if (!split.empty()) result.mean_reward = reward_sum / static_cast<double>(split.size());
  return result;
}

EvalResult evaluate(const Checkpoint& checkpoint, const std::vector<CandidateExample>& pool,
                    const std::vector<CandidateExample>& split, std::shared_ptr<const Embedder> embedder,
                    const Environment& env, const PromptTemplate& tmpl, ActMode mode, std::uint64_t seed) {
  if (!checkpoint.config.contains("train")) {
    throw Error(ErrorKind::config, "checkpoint has no training config");
  }
  const TrainConfig config = train_config_from_json(checkpoint.config.at("train"));
  const PolicyModel model = import_model(checkpoint, config.hgt);
  return evaluate(model, config, pool, split, std::move(embedder), env, tmpl, mode, seed);
}

nlohmann::json to_json(const EvalResult& result) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& e : result.items) {
    auto j = to_json(e.scores);
    j["query"] = e.query;
    j["expected"] = e.expected;
    j["response"] = e.response;
    j["sequence"] = e.sequence;
    j["reward"] = e.reward;
    items.push_back(std::move(j));
  }
  return {{"per_item", std::move(items)},
          {"corpus", to_json(result.report.corpus)},
          {"mean_reward", result.mean_reward},
          {"empty", result.report.empty}};
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "lambda") return SweepAxis::lambda;
  if (name == "hgt_layers" || name == "hgt-layers" || name == "layers") return SweepAxis::hgt_layers;
  throw Error(ErrorKind::config, "unknown sweep axis '" + std::string(name) + "' (expected lambda or hgt_layers)");
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::lambda ? "lambda" : "hgt_layers"; }

std::vector<SweepRow> sweep(const TrainConfig& base, SweepAxis axis, const std::vector<double>& grid,
                            const TaskData& data, std::shared_ptr<const Embedder> embedder,
                            std::shared_ptr<const Environment> env, const PromptTemplate& tmpl) {
  std::vector<SweepRow> rows;
  for (double value : grid) {
    SweepRow row;
    row.value = value;
    try {
      TrainConfig cfg = base;
      if (axis == SweepAxis::lambda) {
        cfg.lambda = value;
      } else {
        if (!(value >= 1.0) || value != std::floor(value)) {
          throw Error(ErrorKind::config, "hgt_layers grid values must be positive integers");
        }
        cfg.hgt.layers = static_cast<std::size_t>(value);
      }
      auto trained = train(cfg, data, embedder, env, tmpl);
      auto ev = evaluate(trained.checkpoint, data.pool, data.eval, embedder, *env, tmpl);
      std::set<std::string> layer_prefixes;
      for (const auto& t : trained.checkpoint.tensors) {
        if (!starts_with(t.name, "hgt.layer")) continue;
        layer_prefixes.insert(t.name.substr(0, t.name.find('.', 4)));
      }
      row.hgt_layers_in_checkpoint = layer_prefixes.size();
      row.tensor_count = trained.checkpoint.tensors.size();
      row.corpus = ev.report.corpus;
      row.mean_reward = ev.mean_reward;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const std::vector<SweepRow>& rows, SweepAxis axis) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{std::string(to_string(axis)), r.value}, {"ok", r.ok}};
    if (r.ok) {
      j["corpus"] = to_json(r.corpus);
      j["mean_reward"] = r.mean_reward;
      j["hgt_layers_in_checkpoint"] = r.hgt_layers_in_checkpoint;
      j["tensor_count"] = r.tensor_count;
    } else {
      j["error"] = r.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace grlp
