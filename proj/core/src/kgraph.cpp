#include "grlp/kgraph.hpp"

#include "grlp/error.hpp"

namespace grlp {

std::string_view to_string(NodeType type) { return type == NodeType::candidate ? "candidate" : "query"; }

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::cc: return "cc";
    case Relation::qc: return "qc";
    case Relation::cq: return "cq";
  }
  return "?";
}

NodeType source_type(Relation relation) { return relation == Relation::qc ? NodeType::query : NodeType::candidate; }

NodeType target_type(Relation relation) { return relation == Relation::cq ? NodeType::query : NodeType::candidate; }

PromptGraph::PromptGraph(Matrix embeddings, std::vector<std::string> labels)
    : num_candidates_(embeddings.rows() > 0 ? static_cast<std::size_t>(embeddings.rows()) - 1 : 0),
      embeddings_(std::move(embeddings)),
      labels_(std::move(labels)) {
  if (num_candidates_ == 0) throw Error(ErrorKind::argument, "graph needs at least one candidate and the query");
  if (!embeddings_.allFinite()) throw Error(ErrorKind::numeric, "node embeddings contain non-finite values");
  if (!labels_.empty() && labels_.size() != num_nodes()) {
    throw Error(ErrorKind::argument, "expected " + std::to_string(num_nodes()) + " labels");
  }

  const std::size_t n = num_candidates_;
  const std::size_t q = query_node();
  edges_.reserve(n * n + n);
  in_neighbors_.resize(n + 1);
  // Emitting relations in order and sources ascending keeps every in-neighbor
  // list sorted by (relation, source).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      edges_.push_back({i, Relation::cc, j});
    }
  }
  for (std::size_t j = 0; j < n; ++j) edges_.push_back({q, Relation::qc, j});
  for (std::size_t i = 0; i < n; ++i) edges_.push_back({i, Relation::cq, q});
  for (const Edge& e : edges_) in_neighbors_[e.dst].push_back({e.src, e.relation});
}

NodeType PromptGraph::node_type(std::size_t node) const {
  if (node > num_candidates_) throw Error(ErrorKind::argument, "unknown node id " + std::to_string(node));
  return node == num_candidates_ ? NodeType::query : NodeType::candidate;
}

const std::vector<Neighbor>& PromptGraph::neighbors(std::size_t node) const {
  if (node > num_candidates_) throw Error(ErrorKind::argument, "unknown node id " + std::to_string(node));
  return in_neighbors_[node];
}

Matrix embed_pool(std::span<const CandidateExample> pool, const Embedder& embedder) {
  if (pool.empty()) throw Error(ErrorKind::argument, "candidate pool is empty");
  Matrix rows(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(embedder.dim()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = embedder.embed_example(pool[i]).transpose();
  }
  return rows;
}

PromptGraph build_graph(const Matrix& candidate_rows, const EmbeddingVector& query_row,
                        std::vector<std::string> labels) {
  if (candidate_rows.rows() == 0) throw Error(ErrorKind::argument, "candidate pool is empty");
  if (candidate_rows.cols() != query_row.size()) {
    throw Error(ErrorKind::shape, "query embedding width differs from candidate embeddings");
  }
  Matrix x(candidate_rows.rows() + 1, candidate_rows.cols());
  x.topRows(candidate_rows.rows()) = candidate_rows;
  x.row(candidate_rows.rows()) = query_row.transpose();
  return PromptGraph(std::move(x), std::move(labels));
}

PromptGraph build_graph(std::span<const CandidateExample> pool, std::string_view query, const Embedder& embedder) {
  if (pool.empty()) throw Error(ErrorKind::argument, "candidate pool is empty");
  if (query.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorKind::argument, "query is empty");
  }
  std::vector<std::string> labels;
  labels.reserve(pool.size() + 1);
  for (const auto& ex : pool) labels.push_back(ex.query);
  labels.emplace_back(query);
  return build_graph(embed_pool(pool, embedder), embedder.embed_text(query), std::move(labels));
}

}  // namespace grlp
