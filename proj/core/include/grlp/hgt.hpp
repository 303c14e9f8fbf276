#pragma once

#include "grlp/kgraph.hpp"
#include "grlp/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace grlp {

struct HgtConfig {
  std::size_t dim = 64;
  std::size_t heads = 2;
  std::size_t layers = 2;
  // Affine layers in the per-message MLP; hidden layers use tanh.
  std::size_t mlp_depth = 1;

  std::size_t head_dim() const { return dim / heads; }
  void validate() const;
};

struct HgtLayerParams {
  std::array<std::vector<Matrix>, kNodeTypeCount> q_lin;  // [node type][head], dim x head_dim
  std::array<std::vector<Matrix>, kNodeTypeCount> k_lin;  // [node type][head], dim x head_dim
  std::array<std::vector<Matrix>, kRelationCount> theta;  // [relation][head], head_dim x head_dim
  // One scalar per relation triplet; each relation fixes its endpoint types,
  // so the triplet is indexed by relation.
  Vector mu;
  std::vector<Matrix> mlp_weight;  // [depth], dim x dim
  std::vector<Vector> mlp_bias;    // [depth], dim
};

struct HgtParams {
  HgtConfig config;
  std::vector<HgtLayerParams> layers;

  /// Same shapes, all zeros.
  HgtParams zeros_like() const;

  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
};

/// Glorot-uniform matrices, mu = 1, biases = 0.
HgtParams init_hgt_params(std::uint64_t seed, const HgtConfig& config);

/// Forward intermediates kept for the backward pass.
struct HgtTape {
  struct Layer {
    Matrix input;                 // X^{l-1}
    std::vector<Matrix> queries;  // [head], nodes x head_dim
    std::vector<Matrix> keys;     // [head], nodes x head_dim
    // [target][neighbor slot][head]
    std::vector<std::vector<std::vector<double>>> scores;   // Q.Theta.K^T before mu/sqrt(d)
    std::vector<std::vector<std::vector<double>>> weights;  // softmax output
    // [target][neighbor slot][depth + 1]: MLP input, hidden activations, output
    std::vector<std::vector<std::vector<RowVector>>> mlp_states;
  };
  std::vector<Layer> layers;
};

struct HgtEncoding {
  Matrix output;
  HgtTape tape;
};

struct HgtGradients {
  HgtParams params;
  Matrix input;  // d(loss)/d(X^0)
};

/// Encodes the graph's X^0 through every layer.
Matrix encode(const PromptGraph& graph, const HgtParams& params);

/// As encode, also recording the tape. Forward values are identical.
HgtEncoding encode_traced(const PromptGraph& graph, const HgtParams& params);

/// Reverse pass: gradient of a scalar whose gradient w.r.t. X^L is `output_grad`.
HgtGradients backward(const PromptGraph& graph, const HgtParams& params, const HgtTape& tape, const Matrix& output_grad);

/// Number of encode / encode_traced calls made by this process.
std::uint64_t encode_invocations();

}  // namespace grlp
