#pragma once

#include "grlp/corpus.hpp"
#include "grlp/embedder.hpp"
#include "grlp/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grlp {

enum class NodeType { candidate = 0, query = 1 };
inline constexpr std::size_t kNodeTypeCount = 2;

// Declaration order is the neighbor sort order.
enum class Relation { cc = 0, qc = 1, cq = 2 };
inline constexpr std::size_t kRelationCount = 3;
inline constexpr std::array<Relation, kRelationCount> kRelations{Relation::cc, Relation::qc, Relation::cq};

std::string_view to_string(NodeType type);
std::string_view to_string(Relation relation);

/// Source and target node types implied by a relation.
NodeType source_type(Relation relation);
NodeType target_type(Relation relation);

struct Edge {
  std::size_t src;
  Relation relation;
  std::size_t dst;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  std::size_t node;
  Relation relation;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Heterogeneous graph over N candidate nodes (ids 0..N-1) and one query
/// node (id N). Candidates are fully connected by cc edges in both
/// directions; the query links to every candidate by qc and back by cq.
class PromptGraph {
 public:
  /// `embeddings` holds N candidate rows followed by the query row.
  /// `labels` (optional, N+1 entries) is kept for inspection output only.
  explicit PromptGraph(Matrix embeddings, std::vector<std::string> labels = {});

  std::size_t num_candidates() const { return num_candidates_; }
  std::size_t num_nodes() const { return num_candidates_ + 1; }
  std::size_t query_node() const { return num_candidates_; }
  std::size_t dim() const { return static_cast<std::size_t>(embeddings_.cols()); }

  NodeType node_type(std::size_t node) const;

  const Matrix& embeddings() const { return embeddings_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// In-neighbors ordered by (relation, source id).
  const std::vector<Neighbor>& neighbors(std::size_t node) const;

 private:
  std::size_t num_candidates_;
  Matrix embeddings_;
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> in_neighbors_;
};

PromptGraph build_graph(std::span<const CandidateExample> pool, std::string_view query, const Embedder& embedder);

/// Candidate rows of X^0 for a pool; cached by callers that rebuild graphs
/// for many queries over the same pool.
Matrix embed_pool(std::span<const CandidateExample> pool, const Embedder& embedder);

/// Graph from cached candidate rows plus a freshly embedded query.
PromptGraph build_graph(const Matrix& candidate_rows, const EmbeddingVector& query_row,
                        std::vector<std::string> labels = {});

}  // namespace grlp
