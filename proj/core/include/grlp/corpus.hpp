#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

/// A (query, context, response) triple. Construct through make() to get the
/// canonical form: empty context becomes absent.
struct CandidateExample {
  std::string query;
  std::optional<std::string> context;
  std::string response;

  static CandidateExample make(std::string query, std::optional<std::string> context, std::string response);

  friend bool operator==(const CandidateExample&, const CandidateExample&) = default;
};

enum class DatasetFormat { alpaca_jsonl, dolly_jsonl };

DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format);

std::vector<CandidateExample> load_dataset(const std::filesystem::path& path, DatasetFormat format);

/// Parses one JSON-lines record; `line_no` only feeds error messages.
CandidateExample parse_record(std::string_view line, DatasetFormat format, std::size_t line_no = 1);

/// Inverse of parse_record: one JSON object without a trailing newline.
std::string to_record(const CandidateExample& example, DatasetFormat format);

struct SplitSizes {
  std::size_t train = 200;
  std::size_t val = 800;
  std::size_t test = 800;

  std::size_t total() const { return train + val + test; }
};

struct DatasetSplit {
  std::vector<CandidateExample> train;
  std::vector<CandidateExample> val;
  std::vector<CandidateExample> test;
  // Positions in the source list, parallel to the example vectors.
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> val_ids;
  std::vector<std::size_t> test_ids;
  std::uint64_t seed = 0;
};

/// Seeded Fisher-Yates shuffle of positions followed by contiguous slicing.
DatasetSplit split(const std::vector<CandidateExample>& examples, std::uint64_t seed, SplitSizes sizes);

/// N distinct training examples drawn by a seeded partial shuffle.
std::vector<CandidateExample> build_candidate_pool(const std::vector<CandidateExample>& train, std::size_t pool_size,
                                                   std::uint64_t seed);

}  // namespace grlp
