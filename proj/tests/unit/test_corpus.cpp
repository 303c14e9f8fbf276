#include "grlp/corpus.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

namespace grlp {
namespace {

std::vector<CandidateExample> numbered(std::size_t n) {
  std::vector<CandidateExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(CandidateExample::make("q" + std::to_string(i), std::nullopt, "r" + std::to_string(i)));
  }
  return out;
}

TEST(Corpus, AlpacaRecord) {
  const auto e = parse_record(R"({"instruction":"Add 2+2","input":"","output":"4"})", DatasetFormat::alpaca_jsonl);
  EXPECT_EQ(e.query, "Add 2+2");
  EXPECT_FALSE(e.context.has_value());
  EXPECT_EQ(e.response, "4");
}

TEST(Corpus, DollyRecord) {
  const auto e = parse_record(R"({"instruction":"Summarize","context":"long text","response":"short"})",
                              DatasetFormat::dolly_jsonl);
  EXPECT_EQ(e, CandidateExample::make("Summarize", "long text", "short"));
}

TEST(Corpus, MissingResponseNamesField) {
  try {
    parse_record(R"({"instruction":"x"})", DatasetFormat::dolly_jsonl, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
    EXPECT_NE(std::string(e.what()).find("response"), std::string::npos) << e.what();
  }
  try {
    parse_record(R"({"instruction":"x"})", DatasetFormat::alpaca_jsonl, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("output"), std::string::npos) << e.what();
  }
}

TEST(Corpus, BlankQueryRejected) {
  EXPECT_GRLP_ERROR(parse_record(R"({"instruction":"  ","input":"","output":"4"})", DatasetFormat::alpaca_jsonl),
                    ErrorKind::schema);
}

TEST(Corpus, MalformedJsonReportsLine) {
  try {
    parse_record("{not json", DatasetFormat::alpaca_jsonl, 17);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 17u);
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(Corpus, RecordRoundTrip) {
  for (auto fmt : {DatasetFormat::alpaca_jsonl, DatasetFormat::dolly_jsonl}) {
    for (const auto& e : {CandidateExample::make("q \"quoted\"", "ctx", "r"), CandidateExample::make("q", "", "r")}) {
      EXPECT_EQ(parse_record(to_record(e, fmt), fmt), e);
    }
  }
}

TEST(Corpus, LoadDatasetSkipsBlankLinesAndRejectsEmpty) {
  const auto dir = std::filesystem::temp_directory_path() / "grlp_corpus_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "data.jsonl") << R"({"instruction":"a","input":"","output":"1"})" << "\n\n"
                                      << R"({"instruction":"b","input":"c","output":"2"})" << "\n";
    std::ofstream(dir / "empty.jsonl") << "\n\n";
  }
  const auto rows = load_dataset(dir / "data.jsonl", DatasetFormat::alpaca_jsonl);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].context, std::optional<std::string>("c"));
  EXPECT_GRLP_ERROR(load_dataset(dir / "empty.jsonl", DatasetFormat::alpaca_jsonl), ErrorKind::empty_dataset);
  EXPECT_GRLP_ERROR(load_dataset(dir / "missing.jsonl", DatasetFormat::alpaca_jsonl), ErrorKind::io);
  std::filesystem::remove_all(dir);
}

TEST(Corpus, SplitSizesAndDisjointness) {
  const auto items = numbered(1800);
  const auto s = split(items, 7, {});
  EXPECT_EQ(s.train.size(), 200u);
  EXPECT_EQ(s.val.size(), 800u);
  EXPECT_EQ(s.test.size(), 800u);
  std::set<std::size_t> ids;
  for (const auto* v : {&s.train_ids, &s.val_ids, &s.test_ids}) ids.insert(v->begin(), v->end());
  EXPECT_EQ(ids.size(), 1800u);
  for (std::size_t k = 0; k < s.train.size(); ++k) EXPECT_EQ(s.train[k], items[s.train_ids[k]]);
}

TEST(Corpus, SplitIsDeterministic) {
  const auto items = numbered(1800);
  const auto a = split(items, 7, {});
  const auto b = split(items, 7, {});
  EXPECT_EQ(a.train_ids, b.train_ids);
  EXPECT_EQ(a.val_ids, b.val_ids);
  EXPECT_EQ(a.test_ids, b.test_ids);
  EXPECT_NE(split(items, 8, {}).train_ids, a.train_ids);
}

TEST(Corpus, SplitTooSmall) { EXPECT_GRLP_ERROR(split(numbered(100), 7, {}), ErrorKind::size); }

TEST(Corpus, CandidatePool) {
  const auto train = numbered(200);
  const auto pool = build_candidate_pool(train, 20, 3);
  EXPECT_EQ(pool.size(), 20u);
  std::set<std::string> queries;
  for (const auto& e : pool) queries.insert(e.query);
  EXPECT_EQ(queries.size(), 20u);
  EXPECT_EQ(build_candidate_pool(train, 20, 3), pool);
  EXPECT_EQ(build_candidate_pool(train, 1, 3).size(), 1u);
  EXPECT_GRLP_ERROR(build_candidate_pool(train, 0, 3), ErrorKind::argument);
  EXPECT_GRLP_ERROR(build_candidate_pool(train, 201, 3), ErrorKind::size);
}

TEST(Corpus, FormatNames) {
  EXPECT_EQ(parse_dataset_format("alpaca"), DatasetFormat::alpaca_jsonl);
  EXPECT_EQ(parse_dataset_format("dolly"), DatasetFormat::dolly_jsonl);
  EXPECT_GRLP_ERROR(parse_dataset_format("csv"), ErrorKind::argument);
}

}  // namespace
}  // namespace grlp
