#include "grlp/cli.hpp"

#include "grlp/checkpoint.hpp"
#include "grlp/corpus.hpp"
#include "grlp/embedder.hpp"
#include "grlp/env.hpp"
#include "grlp/error.hpp"
#include "grlp/kgraph.hpp"
#include "grlp/promptgen.hpp"
#include "grlp/synthetic.hpp"
#include "grlp/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace grlp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::uint64_t seed = 7;
  fs::path out_dir = "grlp-out";
  std::string env = "mock";
  fs::path template_path;

  bool synthetic = false;
  fs::path dataset;
  std::string format = "alpaca";
  std::string splits = "200,800,800";
  std::size_t pool_size = 0;  // 0: 20 for datasets, the whole synthetic pool otherwise

  std::string embedder = "hash";
  fs::path embed_file;
  std::string embed_base_url;
  std::string embed_model;
  std::uint64_t embed_salt = 0;

  std::string base_url;
  std::string model;
  std::string token_env;
  std::size_t max_in_flight = 4;

  // Training knobs, kept as text where the library parses them.
  std::string variant = "full";
  std::string optimizer = "sgd";
  std::string baseline = "ema";
  TrainConfig train;

  // Command-specific.
  fs::path checkpoint;
  std::string split = "test";
  std::string mode = "greedy";
  std::string query;
  bool call_env = false;
  std::string axis = "lambda";
  std::string grid;
  std::string lambda_grid;
  bool full = false;
  bool json_stdout = false;
};

Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }

SplitSizes parse_splits(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw config_error("splits: '" + item + "' is not a positive integer");
    }
  }
  if (parts.size() != 3) throw config_error("splits: expected train,val,test sizes, got '" + text + "'");
  return {parts[0], parts[1], parts[2]};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw config_error("grid: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw config_error("grid: no values given");
  return out;
}

// Everything needed to rebuild the same pool and splits later; stored in checkpoints.
json data_settings(const RunConfig& c) {
  return {{"synthetic", c.synthetic}, {"dataset", c.dataset.string()}, {"format", c.format},
          {"splits", c.splits},       {"pool_size", c.pool_size},       {"seed", c.seed}};
}

json embedder_settings(const RunConfig& c) {
  return {{"kind", c.embedder},           {"dim", c.train.hgt.dim},     {"salt", c.embed_salt},
          {"path", c.embed_file.string()}, {"base_url", c.embed_base_url}, {"model", c.embed_model},
          {"token_env", c.token_env}};
}

void validate(RunConfig& c) {
  c.train.seed = c.seed;
  c.train.variant = parse_variant(c.variant);
  c.train.optimizer = c.optimizer == "adam" ? OptimizerKind::adam
                      : c.optimizer == "sgd" ? OptimizerKind::sgd
                                             : throw config_error("optimizer: expected sgd or adam");
  if (c.baseline != "ema" && c.baseline != "none") throw config_error("baseline: expected ema or none");
  c.train.use_baseline = c.baseline == "ema";
  c.train.validate();
  c.train.hgt.validate();
  if (c.env != "mock" && c.env != "http") throw config_error("env: expected mock or http");
  if (c.env == "http" && (c.base_url.empty() || c.model.empty())) {
    throw config_error("env http needs base-url and model");
  }
  if (c.embedder == "file" && c.embed_file.empty()) throw config_error("embed-file: required for embedder file");
  if (c.embedder == "http" && (c.embed_base_url.empty() || c.embed_model.empty())) {
    throw config_error("embedder http needs embed-base-url and embed-model");
  }
  if (c.embedder != "hash" && c.embedder != "file" && c.embedder != "http") {
    throw config_error("embedder: expected hash, file or http");
  }
  if (!c.synthetic) {
    parse_dataset_format(c.format);
    parse_splits(c.splits);
  }
}

std::shared_ptr<const Embedder> embedder_from(const json& settings) {
  EmbedderConfig cfg;
  const auto kind = settings.at("kind").get<std::string>();
  cfg.kind = kind == "file" ? EmbedderConfig::Kind::file
             : kind == "http" ? EmbedderConfig::Kind::http
                              : EmbedderConfig::Kind::hash;
  cfg.dim = settings.at("dim").get<std::size_t>();
  cfg.salt = settings.at("salt").get<std::uint64_t>();
  cfg.path = settings.at("path").get<std::string>();
  cfg.http.base_url = settings.at("base_url").get<std::string>();
  cfg.http.model = settings.at("model").get<std::string>();
  cfg.http.token_env = settings.at("token_env").get<std::string>();
  return make_embedder(cfg);
}

std::shared_ptr<const Environment> environment_from(const RunConfig& c, const PromptTemplate& tmpl,
                                                    std::shared_ptr<const Embedder> embedder) {
  if (c.env == "mock") return std::make_shared<MockEnvironment>(tmpl, std::move(embedder));
  HttpClientOptions o;
  o.base_url = c.base_url;
  o.model = c.model;
  o.token_env = c.token_env;
  o.max_in_flight = c.max_in_flight;
  return std::make_shared<HttpEnvironment>(o);
}

// Pool, training split and the split named by `eval_split` (train, val or test).
TaskData load_task(const json& settings, const std::string& eval_split) {
  const auto seed = settings.at("seed").get<std::uint64_t>();
  const auto pool_size = settings.at("pool_size").get<std::size_t>();
  TaskData task;
  if (settings.at("synthetic").get<bool>()) {
    task = make_synthetic_task({100, 40, seed});
    if (pool_size > 0) task.pool = build_candidate_pool(task.pool, pool_size, mix_seed(seed, 0x9001));
    if (eval_split == "train") task.eval = task.train;
    return task;
  }
  const auto path = settings.at("dataset").get<std::string>();
  if (path.empty()) throw config_error("dataset: a path is required unless --synthetic is set");
  const auto examples = load_dataset(path, parse_dataset_format(settings.at("format").get<std::string>()));
  auto s = split(examples, seed, parse_splits(settings.at("splits").get<std::string>()));
  task.pool = build_candidate_pool(s.train, pool_size > 0 ? pool_size : 20, mix_seed(seed, 0x9001));
  task.train = std::move(s.train);
  if (eval_split == "train") {
    task.eval = task.train;
  } else if (eval_split == "val") {
    task.eval = std::move(s.val);
  } else {
    task.eval = std::move(s.test);
  }
  return task;
}

PromptTemplate template_of(const RunConfig& c) {
  return c.template_path.empty() ? default_template() : load_template(c.template_path);
}

std::string clip(const std::string& text, std::size_t width = 60) {
  std::string flat = text;
  for (auto& ch : flat)
    if (ch == '\n' || ch == '\t') ch = ' ';
  return flat.size() <= width ? flat : flat.substr(0, width - 3) + "...";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
}

void print_scores(std::ostream& out, const ItemScores& s, double mean_reward) {
  out << std::fixed << std::setprecision(4) << "rouge1  " << s.rouge1 << "\nrouge2  " << s.rouge2 << "\nrougeL  "
      << s.rougeL << "\nbleu    " << s.bleu << "\nreward  " << mean_reward << "\n";
  out.unsetf(std::ios::floatfield);
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto tmpl = template_of(c);
  const auto data = data_settings(c);
  const auto emb_settings = embedder_settings(c);
  const auto task = load_task(data, "val");
  const auto embedder = embedder_from(emb_settings);
  const auto env = environment_from(c, tmpl, embedder);

  Trainer trainer(c.train, task, embedder, env, tmpl);
  trainer.set_run_metadata({{"data", data}, {"embedder", emb_settings}, {"template", format_template(tmpl)}});
  const auto records = trainer.run();

  fs::create_directories(c.out_dir);
  const auto ckpt_path = c.out_dir / "checkpoint.bin";
  save_checkpoint(ckpt_path, trainer.checkpoint());
  std::string log;
  for (const auto& r : records) log += to_json_line(r) + "\n";
  write_file(c.out_dir / "train_log.jsonl", log);

  const auto losses = step_losses(records);
  std::size_t skipped = 0;
  for (const auto& r : records) skipped += r.skipped;
  out << "trained " << trainer.steps_done() << " steps (" << records.size() << " episodes, " << skipped
      << " skipped)\n";
  if (!losses.empty()) out << "final step loss " << losses.back() << "\n";
  out << "checkpoint " << ckpt_path.string() << "\n";
  return kExitOk;
}

Checkpoint load_for_inference(const RunConfig& c) {
  if (c.checkpoint.empty()) throw config_error("checkpoint: a path is required");
  auto cp = load_checkpoint(c.checkpoint);
  if (!cp.config.contains("run") || !cp.config["run"].contains("data")) {
    throw Error(ErrorKind::integrity, "checkpoint lacks run metadata (data and embedder settings)");
  }
  return cp;
}

PromptTemplate template_for(const RunConfig& c, const Checkpoint& cp) {
  if (!c.template_path.empty()) return load_template(c.template_path);
  if (cp.config["run"].contains("template")) return parse_template(cp.config["run"]["template"].get<std::string>());
  return default_template();
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.split != "train" && c.split != "val" && c.split != "test") throw config_error("split: expected train, val or test");
  if (c.mode != "greedy" && c.mode != "sample") throw config_error("mode: expected greedy or sample");
  const auto cp = load_for_inference(c);
  const auto tmpl = template_for(c, cp);
  const auto task = load_task(cp.config["run"]["data"], c.split);
  const auto embedder = embedder_from(cp.config["run"]["embedder"]);
  const auto env = environment_from(c, tmpl, embedder);
  const auto result = evaluate(cp, task.pool, task.eval, embedder, *env, tmpl,
                               c.mode == "sample" ? ActMode::sample : ActMode::greedy, c.seed);
  const auto report = to_json(result);
  const auto path = c.out_dir / ("eval_" + c.split + ".json");
  write_file(path, report.dump(2) + "\n");
  if (c.json_stdout) {
    out << report.dump(2) << "\n";
  } else {
    out << "split " << c.split << ", " << result.items.size() << " items" << (result.report.empty ? " (empty)" : "")
        << "\n";
    print_scores(out, result.report.corpus, result.mean_reward);
    out << "report " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const RunConfig& c, std::ostream& out, const CLI::App& app) {
  if (c.query.empty()) throw config_error("query: text is required");
  const auto cp = load_for_inference(c);
  const auto tmpl = template_for(c, cp);
  auto cfg = train_config_from_json(cp.config.at("train"));
  if (app.count("--k-max") > 0) cfg.k_max = c.train.k_max;
  const auto task = load_task(cp.config["run"]["data"], "test");
  const auto embedder = embedder_from(cp.config["run"]["embedder"]);
  const auto model = import_model(cp, cfg.hgt);

  PromptAgent agent(cfg, task.pool, embedder);
  const auto fwd = agent.forward(c.query, model, false);
  const auto action = agent.act(fwd, model, ActMode::greedy, nullptr);
  const auto sequence = agent.sequence_examples(action);
  out << "selected " << action.sequence.size() << " example(s)\n";
  for (std::size_t k = 0; k < action.sequence.size(); ++k) {
    out << "  " << (k + 1) << ". [" << action.sequence[k] << "] " << clip(sequence[k].query) << " -> "
        << clip(sequence[k].response, 40) << "\n";
  }
  const auto prompt = render_prompt(sequence, c.query, tmpl);
  out << "--- prompt ---\n" << prompt << "\n";
  if (c.call_env) {
    const auto env = environment_from(c, tmpl, embedder);
    CompletionRequest request;
    request.prompt = prompt;
    out << "--- response ---\n" << env->complete(request).text << "\n";
  }
  return kExitOk;
}

int cmd_sweep(RunConfig c, std::ostream& out) {
  std::string grid_text = c.grid;
  std::string axis_name = c.axis;
  if (!c.lambda_grid.empty()) {
    grid_text = c.lambda_grid;
    axis_name = "lambda";
  }
  if (grid_text.empty()) throw config_error("grid: values are required (--grid or --lambda-grid)");
  const auto axis = parse_sweep_axis(axis_name);
  const auto grid = parse_grid(grid_text);

  const auto tmpl = template_of(c);
  const auto task = load_task(data_settings(c), "val");
  const auto embedder = embedder_from(embedder_settings(c));
  const auto env = environment_from(c, tmpl, embedder);
  const auto rows = sweep(c.train, axis, grid, task, embedder, env, tmpl);

  write_file(c.out_dir / "sweep.json", to_json(rows, axis).dump(2) + "\n");
  out << std::left << std::setw(12) << to_string(axis) << std::setw(9) << "rouge1" << std::setw(9) << "rouge2"
      << std::setw(9) << "rougeL" << std::setw(9) << "bleu" << "reward\n";
  for (const auto& r : rows) {
    std::ostringstream v;
    v << r.value;
    out << std::setw(12) << v.str();
    if (!r.ok) {
      out << "failed: " << r.error << "\n";
      continue;
    }
    out << std::fixed << std::setprecision(4) << std::setw(9) << r.corpus.rouge1 << std::setw(9) << r.corpus.rouge2
        << std::setw(9) << r.corpus.rougeL << std::setw(9) << r.corpus.bleu << r.mean_reward << "\n";
    out.unsetf(std::ios::floatfield);
  }
  return kExitOk;
}

int cmd_inspect_graph(const RunConfig& c, std::ostream& out) {
  const auto task = load_task(data_settings(c), "test");
  const auto embedder = embedder_from(embedder_settings(c));
  const std::string query = c.query.empty() ? task.eval.front().query : c.query;

  std::vector<std::string> labels;
  for (const auto& e : task.pool) labels.push_back(clip(e.query));
  labels.push_back(clip(query));
  const auto graph = build_graph(embed_pool(task.pool, *embedder), embedder->embed_text(query), labels);

  json nodes = json::array();
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    json node{{"id", i}, {"type", to_string(graph.node_type(i))}, {"text", graph.labels()[i]}};
    if (c.full) {
      const auto row = graph.embeddings().row(static_cast<Eigen::Index>(i));
      node["x"] = std::vector<double>(row.data(), row.data() + row.size());
    }
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.src, to_string(e.relation), e.dst});
  const json doc{{"num_candidates", graph.num_candidates()},
                 {"x_shape", {graph.num_nodes(), graph.dim()}},
                 {"nodes", nodes},
                 {"edges", edges}};
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::argument:
    case ErrorKind::template_format:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Learns which in-context examples to put in a prompt, and in what order."};
  app.name("grlp");
  app.set_config("--config", "", "TOML file with option values; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--seed", c.seed, "Seed for splits, pool, initialization and sampling")->capture_default_str();
  app.add_option("--out-dir", c.out_dir, "Directory for checkpoints, logs and reports")->capture_default_str();
  app.add_option("--env", c.env, "Environment: mock or http")->capture_default_str();
  app.add_option("--template", c.template_path, "Prompt template file");

  app.add_flag("--synthetic", c.synthetic, "Use the built-in six-example synthetic task instead of a dataset");
  app.add_option("--dataset", c.dataset, "JSON-lines dataset");
  app.add_option("--format", c.format, "Dataset format: alpaca or dolly")->capture_default_str();
  app.add_option("--splits", c.splits, "Train,val,test sizes")->capture_default_str();
  app.add_option("--pool-size", c.pool_size, "Candidate pool size (default 20; whole pool for --synthetic)");

  app.add_option("--embedder", c.embedder, "Embedder: hash, file or http")->capture_default_str();
  app.add_option("--embed-file", c.embed_file, "Precomputed vectors for the file embedder");
  app.add_option("--embed-base-url", c.embed_base_url, "Embedding API base URL");
  app.add_option("--embed-model", c.embed_model, "Embedding API model name");
  app.add_option("--embed-salt", c.embed_salt, "Hash embedder salt")->capture_default_str();

  app.add_option("--base-url", c.base_url, "Chat-completions API base URL");
  app.add_option("--model", c.model, "Chat-completions model name");
  app.add_option("--token-env", c.token_env, "Environment variable holding the API token");
  app.add_option("--max-in-flight", c.max_in_flight, "Concurrent HTTP requests")->capture_default_str();

  app.add_option("--lambda", c.train.lambda, "Weight of the edit-distance term in the reward")->capture_default_str();
  app.add_option("--k-max", c.train.k_max, "Maximum number of in-context examples")->capture_default_str();
  app.add_option("--knn-k", c.train.knn_k, "Neighbors for the knn-select variant")->capture_default_str();
  app.add_option("--variant", c.variant, "full, no-kg or knn-select")->capture_default_str();
  app.add_option("--hgt-layers", c.train.hgt.layers, "Encoder layers")->capture_default_str();
  app.add_option("--heads", c.train.hgt.heads, "Attention heads")->capture_default_str();
  app.add_option("--dim", c.train.hgt.dim, "Embedding and encoder width")->capture_default_str();
  app.add_option("--mlp-depth", c.train.hgt.mlp_depth, "Affine layers per message MLP")->capture_default_str();
  app.add_option("--batch-size", c.train.batch_size, "Episodes per update")->capture_default_str();
  app.add_option("--epochs", c.train.epochs, "Passes over the training split")->capture_default_str();
  app.add_option("--max-steps", c.train.max_steps, "Update count; overrides --epochs when non-zero")
      ->capture_default_str();
  app.add_option("--learning-rate", c.train.learning_rate, "Step size")->capture_default_str();
  app.add_option("--optimizer", c.optimizer, "sgd or adam")->capture_default_str();
  app.add_option("--baseline", c.baseline, "ema or none")->capture_default_str();
  app.add_option("--baseline-decay", c.train.baseline_decay, "EMA decay of the reward baseline")
      ->capture_default_str();
  app.add_option("--rollout-threads", c.train.rollout_threads, "Concurrent environment calls per batch")
      ->capture_default_str();

  auto* train = app.add_subcommand("train", "Train a selection policy");
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a split");
  eval->add_option("--checkpoint", c.checkpoint, "Checkpoint file");
  eval->add_option("--split", c.split, "train, val or test")->capture_default_str();
  eval->add_option("--mode", c.mode, "greedy or sample")->capture_default_str();
  eval->add_flag("--json", c.json_stdout, "Print the JSON report instead of the table");
  auto* optimize = app.add_subcommand("optimize", "Build the prompt for one query");
  optimize->add_option("--checkpoint", c.checkpoint, "Checkpoint file");
  optimize->add_option("--query", c.query, "Query text");
  optimize->add_flag("--call-env", c.call_env, "Send the prompt to the environment and print the reply");
  auto* sweep_cmd = app.add_subcommand("sweep", "Train and evaluate across a grid of one setting");
  sweep_cmd->add_option("--axis", c.axis, "lambda or hgt-layers")->capture_default_str();
  sweep_cmd->add_option("--grid", c.grid, "Comma-separated values");
  app.add_option("--lambda-grid", c.lambda_grid, "Comma-separated lambda values for sweep");
  auto* inspect = app.add_subcommand("inspect-graph", "Print the prompt graph as JSON");
  inspect->add_option("--query", c.query, "Query node text (default: first test query)");
  inspect->add_flag("--full", c.full, "Include node embeddings");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    validate(c);
    if (train->parsed()) return cmd_train(c, out);
    if (eval->parsed()) return cmd_eval(c, out);
    if (optimize->parsed()) return cmd_optimize(c, out, app);
    if (sweep_cmd->parsed()) return cmd_sweep(c, out);
    if (inspect->parsed()) return cmd_inspect_graph(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace grlp
