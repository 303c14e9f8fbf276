#include "grlp/embedder.hpp"
#include "grlp/kgraph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace grlp {
namespace {

std::vector<CandidateExample> pool(std::size_t n) {
  std::vector<CandidateExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(CandidateExample::make("query " + std::to_string(i), std::nullopt, "answer " + std::to_string(i)));
  }
  return out;
}

std::size_t count(const PromptGraph& g, Relation r) {
  return static_cast<std::size_t>(
      std::count_if(g.edges().begin(), g.edges().end(), [r](const Edge& e) { return e.relation == r; }));
}

TEST(PromptGraph, EdgeCounts) {
  HashEmbedder emb(8);
  for (std::size_t n : {1u, 2u, 3u, 7u}) {
    const auto p = pool(n);
    const auto g = build_graph(p, "what now", emb);
    EXPECT_EQ(g.edges().size(), n * n + n);
    EXPECT_EQ(count(g, Relation::cc), n * (n - 1));
    EXPECT_EQ(count(g, Relation::qc), n);
    EXPECT_EQ(count(g, Relation::cq), n);
    EXPECT_EQ(static_cast<std::size_t>(g.embeddings().rows()), n + 1);
  }
}

TEST(PromptGraph, BothCandidateDirectionsPresent) {
  HashEmbedder emb(8);
  const auto p = pool(3);
  const auto g = build_graph(p, "q", emb);
  const auto& e = g.edges();
  EXPECT_NE(std::find(e.begin(), e.end(), Edge{0, Relation::cc, 1}), e.end());
  EXPECT_NE(std::find(e.begin(), e.end(), Edge{1, Relation::cc, 0}), e.end());
}

TEST(PromptGraph, Neighbors) {
  HashEmbedder emb(8);
  const auto p3 = pool(3);
  const auto g = build_graph(p3, "q", emb);
  const auto& qn = g.neighbors(g.query_node());
  ASSERT_EQ(qn.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(qn[i], (Neighbor{i, Relation::cq}));
  EXPECT_EQ(g.neighbors(0),
            (std::vector<Neighbor>{{1, Relation::cc}, {2, Relation::cc}, {3, Relation::qc}}));

  const auto p1 = pool(1);
  const auto g1 = build_graph(p1, "q", emb);
  EXPECT_EQ(g1.neighbors(0), (std::vector<Neighbor>{{1, Relation::qc}}));
  EXPECT_GRLP_ERROR(g1.neighbors(2), ErrorKind::argument);
}

TEST(PromptGraph, NodeTypesAndRows) {
  HashEmbedder emb(16);
  const auto p = pool(2);
  const auto g = build_graph(p, "final question", emb);
  EXPECT_EQ(g.node_type(0), NodeType::candidate);
  EXPECT_EQ(g.node_type(2), NodeType::query);
  EXPECT_EQ(g.embeddings().row(0).transpose(), emb.embed_example(p[0]));
  EXPECT_EQ(g.embeddings().row(2).transpose(), emb.embed_text("final question"));
  EXPECT_EQ(source_type(Relation::qc), NodeType::query);
  EXPECT_EQ(target_type(Relation::cq), NodeType::query);
}

TEST(PromptGraph, CachedRowsMatchDirectBuild) {
  HashEmbedder emb(16);
  const auto p = pool(4);
  const auto direct = build_graph(p, "hello", emb);
  const auto cached = build_graph(embed_pool(p, emb), emb.embed_text("hello"));
  EXPECT_EQ(direct.embeddings(), cached.embeddings());
  EXPECT_EQ(direct.edges(), cached.edges());
}

TEST(PromptGraph, Errors) {
  HashEmbedder emb(8);
  EXPECT_GRLP_ERROR(build_graph(std::vector<CandidateExample>{}, "q", emb), ErrorKind::argument);
  const auto p = pool(2);
  EXPECT_GRLP_ERROR(build_graph(p, "", emb), ErrorKind::argument);
  Matrix bad = Matrix::Zero(3, 4);
  bad(1, 1) = std::nan("");
  EXPECT_GRLP_ERROR(PromptGraph{bad}, ErrorKind::numeric);
}

}  // namespace
}  // namespace grlp
