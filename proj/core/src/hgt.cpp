#include "grlp/hgt.hpp"

#include "grlp/error.hpp"
#include "grlp/rng.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace grlp {
namespace {

std::atomic<std::uint64_t> g_encode_calls{0};

std::string layer_prefix(std::size_t l) { return "hgt.layer" + std::to_string(l) + "."; }

Matrix glorot(Rng& rng, std::size_t rows, std::size_t cols) {
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-s, s);
  return m;
}

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
    throw Error(ErrorKind::shape, what + " is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                      ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void check_params(const HgtParams& params, std::size_t graph_dim) {
  const HgtConfig& c = params.config;
  c.validate();
  if (graph_dim != c.dim) {
    throw Error(ErrorKind::shape, "graph embeddings have width " + std::to_string(graph_dim) +
                                      " but the encoder expects " + std::to_string(c.dim));
  }
  if (params.layers.size() != c.layers) throw Error(ErrorKind::shape, "layer count does not match config");
  const std::size_t d = c.dim;
  const std::size_t dk = c.head_dim();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    const std::string at = layer_prefix(l);
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      if (p.q_lin[t].size() != c.heads || p.k_lin[t].size() != c.heads) {
        throw Error(ErrorKind::shape, at + "projection head count does not match config");
      }
      for (std::size_t h = 0; h < c.heads; ++h) {
        expect_shape(p.q_lin[t][h], d, dk, at + "q_lin");
        expect_shape(p.k_lin[t][h], d, dk, at + "k_lin");
      }
    }
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      if (p.theta[r].size() != c.heads) throw Error(ErrorKind::shape, at + "theta head count does not match config");
      for (std::size_t h = 0; h < c.heads; ++h) expect_shape(p.theta[r][h], dk, dk, at + "theta");
    }
    if (static_cast<std::size_t>(p.mu.size()) != kRelationCount) throw Error(ErrorKind::shape, at + "mu size");
    if (p.mlp_weight.size() != c.mlp_depth || p.mlp_bias.size() != c.mlp_depth) {
      throw Error(ErrorKind::shape, at + "mlp depth does not match config");
    }
    for (std::size_t k = 0; k < c.mlp_depth; ++k) {
      expect_shape(p.mlp_weight[k], d, d, at + "mlp weight");
      if (static_cast<std::size_t>(p.mlp_bias[k].size()) != d) throw Error(ErrorKind::shape, at + "mlp bias size");
    }
  }
}

std::size_t type_index(const PromptGraph& graph, std::size_t node) {
  return static_cast<std::size_t>(graph.node_type(node));
}

// One HGT layer. `rec` is filled when tracing; the arithmetic is the same either way.
Matrix forward_layer(const PromptGraph& graph, const HgtLayerParams& p, const HgtConfig& c, const Matrix& x,
                     std::size_t layer, HgtTape::Layer* rec) {
  const std::size_t n = graph.num_nodes();
  const std::size_t heads = c.heads;
  const Eigen::Index dk = static_cast<Eigen::Index>(c.head_dim());
  const double sqrt_d = std::sqrt(static_cast<double>(c.dim));

  std::vector<Matrix> queries(heads, Matrix(static_cast<Eigen::Index>(n), dk));
  std::vector<Matrix> keys(heads, Matrix(static_cast<Eigen::Index>(n), dk));
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t t = type_index(graph, v);
    const auto row = static_cast<Eigen::Index>(v);
    for (std::size_t h = 0; h < heads; ++h) {
      queries[h].row(row).noalias() = x.row(row) * p.q_lin[t][h];
      keys[h].row(row).noalias() = x.row(row) * p.k_lin[t][h];
    }
  }

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), x.cols());
  if (rec) {
    rec->input = x;
    rec->scores.assign(n, {});
    rec->weights.assign(n, {});
    rec->mlp_states.assign(n, {});
  }

  for (std::size_t j = 0; j < n; ++j) {
    const auto& nbrs = graph.neighbors(j);
    const std::size_t k = nbrs.size();
    const auto jr = static_cast<Eigen::Index>(j);
    std::vector<std::vector<double>> scores(k, std::vector<double>(heads));
    std::vector<std::vector<double>> weights(k, std::vector<double>(heads));

    for (std::size_t h = 0; h < heads; ++h) {
      double max_logit = -INFINITY;
      std::vector<double> logits(k);
      for (std::size_t s = 0; s < k; ++s) {
        const auto r = static_cast<std::size_t>(nbrs[s].relation);
        const auto ir = static_cast<Eigen::Index>(nbrs[s].node);
        const double score = (queries[h].row(jr) * p.theta[r][h]).dot(keys[h].row(ir));
        scores[s][h] = score;
        logits[s] = score * p.mu[static_cast<Eigen::Index>(r)] / sqrt_d;
        max_logit = std::max(max_logit, logits[s]);
      }
      double total = 0.0;
      for (std::size_t s = 0; s < k; ++s) {
        weights[s][h] = std::exp(logits[s] - max_logit);
        total += weights[s][h];
      }
      for (std::size_t s = 0; s < k; ++s) weights[s][h] /= total;
      if (!std::isfinite(max_logit) || !std::isfinite(total)) {
        throw Error(ErrorKind::numeric, "non-finite attention in layer " + std::to_string(layer) + " head " +
                                            std::to_string(h) + " at node " + std::to_string(j));
      }
    }

    std::vector<std::vector<RowVector>> states;
    if (rec) states.resize(k);
    RowVector acc = RowVector::Zero(x.cols());
    for (std::size_t s = 0; s < k; ++s) {
      const auto ir = static_cast<Eigen::Index>(nbrs[s].node);
      RowVector z(x.cols());
      for (std::size_t h = 0; h < heads; ++h) {
        z.segment(static_cast<Eigen::Index>(h) * dk, dk) = weights[s][h] * keys[h].row(ir);
      }
      if (rec) states[s].push_back(z);
      for (std::size_t depth = 0; depth < c.mlp_depth; ++depth) {
        RowVector a = z * p.mlp_weight[depth] + p.mlp_bias[depth].transpose();
        z = (depth + 1 < c.mlp_depth) ? RowVector(a.array().tanh()) : a;
        if (rec) states[s].push_back(z);
      }
      acc += z;
    }
    out.row(jr) = acc / static_cast<double>(k);
    if (!out.row(jr).allFinite()) {
      throw Error(ErrorKind::numeric,
                  "non-finite output in layer " + std::to_string(layer) + " mlp at node " + std::to_string(j));
    }
    if (rec) {
      rec->scores[j] = std::move(scores);
      rec->weights[j] = std::move(weights);
      rec->mlp_states[j] = std::move(states);
    }
  }

  if (rec) {
    rec->queries = std::move(queries);
    rec->keys = std::move(keys);
  }
  return out;
}

Matrix backward_layer(const PromptGraph& graph, const HgtLayerParams& p, const HgtConfig& c,
                      const HgtTape::Layer& rec, const Matrix& grad_out, HgtLayerParams& g) {
  const std::size_t n = graph.num_nodes();
  const std::size_t heads = c.heads;
  const Eigen::Index dk = static_cast<Eigen::Index>(c.head_dim());
  const double sqrt_d = std::sqrt(static_cast<double>(c.dim));

  std::vector<Matrix> d_queries(heads, Matrix::Zero(static_cast<Eigen::Index>(n), dk));
  std::vector<Matrix> d_keys(heads, Matrix::Zero(static_cast<Eigen::Index>(n), dk));

  for (std::size_t j = 0; j < n; ++j) {
    const auto& nbrs = graph.neighbors(j);
    const std::size_t k = nbrs.size();
    const auto jr = static_cast<Eigen::Index>(j);
    const RowVector g_row = grad_out.row(jr) / static_cast<double>(k);
    const auto& weights = rec.weights[j];
    std::vector<std::vector<double>> d_weights(k, std::vector<double>(heads));

    for (std::size_t s = 0; s < k; ++s) {
      const auto& states = rec.mlp_states[j][s];
      RowVector dz = g_row;
      for (std::size_t depth = c.mlp_depth; depth-- > 0;) {
        RowVector da = dz;
        if (depth + 1 < c.mlp_depth) da.array() *= 1.0 - states[depth + 1].array().square();
        g.mlp_weight[depth].noalias() += states[depth].transpose() * da;
        g.mlp_bias[depth] += da.transpose();
        dz = da * p.mlp_weight[depth].transpose();
      }
      const auto ir = static_cast<Eigen::Index>(nbrs[s].node);
      for (std::size_t h = 0; h < heads; ++h) {
        const auto seg = dz.segment(static_cast<Eigen::Index>(h) * dk, dk);
        d_weights[s][h] = seg.dot(rec.keys[h].row(ir));
        d_keys[h].row(ir) += weights[s][h] * seg;
      }
    }

    for (std::size_t h = 0; h < heads; ++h) {
      double inner = 0.0;
      for (std::size_t s = 0; s < k; ++s) inner += weights[s][h] * d_weights[s][h];
      for (std::size_t s = 0; s < k; ++s) {
        const double d_logit = weights[s][h] * (d_weights[s][h] - inner);
        const auto r = static_cast<std::size_t>(nbrs[s].relation);
        const auto ri = static_cast<Eigen::Index>(r);
        const auto ir = static_cast<Eigen::Index>(nbrs[s].node);
        g.mu[ri] += d_logit * rec.scores[j][s][h] / sqrt_d;
        const double d_score = d_logit * p.mu[ri] / sqrt_d;
        const auto q = rec.queries[h].row(jr);
        const auto key = rec.keys[h].row(ir);
        d_queries[h].row(jr).noalias() += d_score * key * p.theta[r][h].transpose();
        d_keys[h].row(ir).noalias() += d_score * q * p.theta[r][h];
        g.theta[r][h].noalias() += d_score * q.transpose() * key;
      }
    }
  }

  Matrix grad_in = Matrix::Zero(rec.input.rows(), rec.input.cols());
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t t = type_index(graph, v);
    const auto vr = static_cast<Eigen::Index>(v);
    for (std::size_t h = 0; h < heads; ++h) {
      g.q_lin[t][h].noalias() += rec.input.row(vr).transpose() * d_queries[h].row(vr);
      g.k_lin[t][h].noalias() += rec.input.row(vr).transpose() * d_keys[h].row(vr);
      grad_in.row(vr).noalias() += d_queries[h].row(vr) * p.q_lin[t][h].transpose();
      grad_in.row(vr).noalias() += d_keys[h].row(vr) * p.k_lin[t][h].transpose();
    }
  }
  return grad_in;
}

}  // namespace

void HgtConfig::validate() const {
  if (dim < 2) throw Error(ErrorKind::argument, "HGT dimension must be at least 2");
  if (heads == 0 || dim % heads != 0) {
    throw Error(ErrorKind::argument,
                "head count " + std::to_string(heads) + " does not divide dimension " + std::to_string(dim));
  }
  if (layers == 0) throw Error(ErrorKind::argument, "HGT needs at least one layer");
  if (mlp_depth == 0) throw Error(ErrorKind::argument, "MLP depth must be at least 1");
}

HgtParams HgtParams::zeros_like() const {
  HgtParams z = *this;
  for (auto& t : z.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
  return z;
}

std::vector<TensorView> HgtParams::tensors() {
  std::vector<TensorView> out;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& p = layers[l];
    const std::string at = layer_prefix(l);
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      const std::string type(to_string(static_cast<NodeType>(t)));
      for (std::size_t h = 0; h < p.q_lin[t].size(); ++h) {
        out.push_back(view_of(at + "q_lin." + type + ".head" + std::to_string(h), p.q_lin[t][h]));
      }
      for (std::size_t h = 0; h < p.k_lin[t].size(); ++h) {
        out.push_back(view_of(at + "k_lin." + type + ".head" + std::to_string(h), p.k_lin[t][h]));
      }
    }
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      const std::string rel(to_string(static_cast<Relation>(r)));
      for (std::size_t h = 0; h < p.theta[r].size(); ++h) {
        out.push_back(view_of(at + "theta." + rel + ".head" + std::to_string(h), p.theta[r][h]));
      }
    }
    out.push_back(view_of(at + "mu", p.mu));
    for (std::size_t k = 0; k < p.mlp_weight.size(); ++k) {
      out.push_back(view_of(at + "mlp" + std::to_string(k) + ".weight", p.mlp_weight[k]));
      out.push_back(view_of(at + "mlp" + std::to_string(k) + ".bias", p.mlp_bias[k]));
    }
  }
  return out;
}

std::vector<ConstTensorView> HgtParams::tensors() const {
  std::vector<ConstTensorView> out;
  for (auto& t : const_cast<HgtParams*>(this)->tensors()) {
    out.push_back({std::move(t.name), std::move(t.shape), t.values});
  }
  return out;
}

HgtParams init_hgt_params(std::uint64_t seed, const HgtConfig& config) {
  config.validate();
  Rng rng(seed);
  const std::size_t d = config.dim;
  const std::size_t dk = config.head_dim();
  HgtParams params;
  params.config = config;
  params.layers.resize(config.layers);
  for (auto& p : params.layers) {
    for (std::size_t t = 0; t < kNodeTypeCount; ++t) {
      for (std::size_t h = 0; h < config.heads; ++h) p.q_lin[t].push_back(glorot(rng, d, dk));
      for (std::size_t h = 0; h < config.heads; ++h) p.k_lin[t].push_back(glorot(rng, d, dk));
    }
    for (std::size_t r = 0; r < kRelationCount; ++r) {
      for (std::size_t h = 0; h < config.heads; ++h) p.theta[r].push_back(glorot(rng, dk, dk));
    }
    p.mu = Vector::Ones(static_cast<Eigen::Index>(kRelationCount));
    for (std::size_t k = 0; k < config.mlp_depth; ++k) {
      p.mlp_weight.push_back(glorot(rng, d, d));
      p.mlp_bias.push_back(Vector::Zero(static_cast<Eigen::Index>(d)));
    }
  }
  return params;
}

Matrix encode(const PromptGraph& graph, const HgtParams& params) {
  ++g_encode_calls;
  check_params(params, graph.dim());
  Matrix x = graph.embeddings();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    x = forward_layer(graph, params.layers[l], params.config, x, l, nullptr);
  }
  return x;
}

HgtEncoding encode_traced(const PromptGraph& graph, const HgtParams& params) {
  ++g_encode_calls;
  check_params(params, graph.dim());
  HgtEncoding result;
  result.tape.layers.resize(params.layers.size());
  Matrix x = graph.embeddings();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    x = forward_layer(graph, params.layers[l], params.config, x, l, &result.tape.layers[l]);
  }
  result.output = std::move(x);
  return result;
}

HgtGradients backward(const PromptGraph& graph, const HgtParams& params, const HgtTape& tape,
                      const Matrix& output_grad) {
  if (tape.layers.size() != params.layers.size()) {
    throw Error(ErrorKind::shape, "tape was recorded with a different layer count");
  }
  if (output_grad.rows() != static_cast<Eigen::Index>(graph.num_nodes()) ||
      output_grad.cols() != static_cast<Eigen::Index>(params.config.dim)) {
    throw Error(ErrorKind::shape, "output gradient has the wrong shape");
  }
  HgtGradients grads{params.zeros_like(), {}};
  Matrix g = output_grad;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    g = backward_layer(graph, params.layers[l], params.config, tape.layers[l], g, grads.params.layers[l]);
  }
  grads.input = std::move(g);
  return grads;
}

std::uint64_t encode_invocations() { return g_encode_calls.load(); }

}  // namespace grlp
