#include "grlp/corpus.hpp"

#include "grlp/error.hpp"
#include "grlp/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

namespace grlp {
namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

struct FieldNames {
  const char* query;
  const char* context;
  const char* response;
};

FieldNames fields_for(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::alpaca_jsonl: return {"instruction", "input", "output"};
    case DatasetFormat::dolly_jsonl: return {"instruction", "context", "response"};
  }
  return {"instruction", "input", "output"};
}

std::string required_string(const nlohmann::json& record, const char* field, std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) {
    throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": missing required field '" + field + "'");
  }
  if (!it->is_string()) {
    throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

CandidateExample CandidateExample::make(std::string query, std::optional<std::string> context, std::string response) {
  if (is_blank(query)) throw Error(ErrorKind::schema, "query must be non-empty");
  if (response.empty()) throw Error(ErrorKind::schema, "response must be non-empty");
  if (context && context->empty()) context.reset();
  return CandidateExample{std::move(query), std::move(context), std::move(response)};
}

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "alpaca" || name == "alpaca_jsonl") return DatasetFormat::alpaca_jsonl;
  if (name == "dolly" || name == "dolly_jsonl") return DatasetFormat::dolly_jsonl;
  throw Error(ErrorKind::argument, "unknown dataset format '" + std::string(name) + "' (expected alpaca or dolly)");
}

std::string_view to_string(DatasetFormat format) {
  return format == DatasetFormat::alpaca_jsonl ? "alpaca" : "dolly";
}

CandidateExample parse_record(std::string_view line, DatasetFormat format, std::size_t line_no) {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, e.what());
  }
  if (!record.is_object()) throw ParseError(line_no, "record is not a JSON object");

  const FieldNames names = fields_for(format);
  std::string query = required_string(record, names.query, line_no);
  std::string response = required_string(record, names.response, line_no);
  std::optional<std::string> context;
  if (auto it = record.find(names.context); it != record.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorKind::schema,
                  "line " + std::to_string(line_no) + ": field '" + names.context + "' must be a string");
    }
    context = it->get<std::string>();
  }
  if (is_blank(query)) {
    throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": field '" + names.query + "' is empty");
  }
  if (response.empty()) {
    throw Error(ErrorKind::schema, "line " + std::to_string(line_no) + ": field '" + names.response + "' is empty");
  }
  return CandidateExample::make(std::move(query), std::move(context), std::move(response));
}

std::string to_record(const CandidateExample& example, DatasetFormat format) {
  const FieldNames names = fields_for(format);
  nlohmann::ordered_json record;
  record[names.query] = example.query;
  record[names.context] = example.context.value_or("");
  record[names.response] = example.response;
  return record.dump();
}

std::vector<CandidateExample> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open dataset '" + path.string() + "'");

  std::vector<CandidateExample> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    examples.push_back(parse_record(line, format, line_no));
  }
  if (examples.empty()) throw Error(ErrorKind::empty_dataset, "no records in '" + path.string() + "'");
  return examples;
}

DatasetSplit split(const std::vector<CandidateExample>& examples, std::uint64_t seed, SplitSizes sizes) {
  if (sizes.total() > examples.size()) {
    throw Error(ErrorKind::size, "split needs " + std::to_string(sizes.total()) + " examples but only " +
                                     std::to_string(examples.size()) + " are available");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  DatasetSplit out;
  out.seed = seed;
  auto take = [&](std::size_t begin, std::size_t count, std::vector<CandidateExample>& dst,
                  std::vector<std::size_t>& ids) {
    ids.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
               order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    dst.reserve(count);
    for (std::size_t id : ids) dst.push_back(examples[id]);
  };
  take(0, sizes.train, out.train, out.train_ids);
  take(sizes.train, sizes.val, out.val, out.val_ids);
  take(sizes.train + sizes.val, sizes.test, out.test, out.test_ids);
  return out;
}

std::vector<CandidateExample> build_candidate_pool(const std::vector<CandidateExample>& train, std::size_t pool_size,
                                                   std::uint64_t seed) {
  if (pool_size < 1) throw Error(ErrorKind::argument, "pool size must be at least 1");
  if (pool_size > train.size()) {
    throw Error(ErrorKind::size, "pool size " + std::to_string(pool_size) + " exceeds " +
                                     std::to_string(train.size()) + " training examples");
  }
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 1));
  for (std::size_t i = 0; i < pool_size; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }
  std::vector<CandidateExample> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(train[order[i]]);
  return pool;
}

}  // namespace grlp
