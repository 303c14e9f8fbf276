#include "grlp/error.hpp"
#include "grlp/hgt.hpp"
#include "grlp/kgraph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <numeric>

namespace grlp {
namespace {

using testing::max_fd_error;
using testing::random_matrix;

HgtParams randomized_params(std::uint64_t seed, const HgtConfig& cfg) {
  HgtParams p = init_hgt_params(seed, cfg);
  // mu and the biases start at constants; spread them so their gradients are exercised.
  Rng rng(seed ^ 0xabcdef);
  for (auto& layer : p.layers) {
    for (Eigen::Index r = 0; r < layer.mu.size(); ++r) layer.mu[r] = rng.uniform(0.5, 1.5);
    for (auto& b : layer.mlp_bias) {
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-0.2, 0.2);
    }
  }
  return p;
}

TEST(Hgt, MatchesStraightLineOracle) {
  const auto fx = testing::load_json("hgt_forward.json");
  HgtConfig cfg{fx.at("dim"), fx.at("heads"), fx.at("layers"), 1};
  const auto n = fx.at("num_candidates").get<Eigen::Index>();
  const auto d = static_cast<Eigen::Index>(cfg.dim);

  HgtParams params = init_hgt_params(0, cfg);
  std::size_t loaded = 0;
  for (auto& t : params.tensors()) {
    const auto& values = fx.at("tensors").at(t.name);
    ASSERT_EQ(values.size(), t.values.size()) << t.name;
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = values[i].get<double>();
    ++loaded;
  }
  EXPECT_EQ(loaded, fx.at("tensors").size());

  Matrix x0(n + 1, d);
  const auto flat = fx.at("x0").get<std::vector<double>>();
  std::copy(flat.begin(), flat.end(), x0.data());
  const Matrix x1 = encode(PromptGraph(x0), params);

  const auto expected = fx.at("x1").get<std::vector<double>>();
  for (Eigen::Index i = 0; i < x1.size(); ++i) EXPECT_NEAR(x1.data()[i], expected[static_cast<std::size_t>(i)], 1e-10);
}

TEST(Hgt, ZeroProjectionsCollapseToBias) {
  HgtConfig cfg{4, 2, 1, 1};
  HgtParams p = init_hgt_params(3, cfg).zeros_like();
  p.layers[0].mu.setOnes();
  Vector b(4);
  b << 0.5, -1.0, 2.0, 0.25;
  p.layers[0].mlp_bias[0] = b;
  const Matrix x = encode(PromptGraph(random_matrix(5, 4, 4)), p);
  for (Eigen::Index r = 0; r < x.rows(); ++r) EXPECT_TRUE(x.row(r).transpose().isApprox(b, 1e-15)) << r;
}

TEST(Hgt, RejectsHeadsNotDividingDim) {
  HgtConfig cfg{8, 3, 1, 1};
  try {
    init_hgt_params(1, cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::argument);
  }
}

TEST(Hgt, DimensionMismatchIsShapeError) {
  HgtConfig cfg{8, 2, 1, 1};
  const auto p = init_hgt_params(1, cfg);
  try {
    encode(PromptGraph(random_matrix(1, 3, 4)), p);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(Hgt, TracedForwardIsBitwiseIdentical) {
  HgtConfig cfg{8, 2, 2, 1};
  const auto p = randomized_params(11, cfg);
  PromptGraph g(random_matrix(12, 5, 8));
  const Matrix plain = encode(g, p);
  const auto traced = encode_traced(g, p);
  ASSERT_EQ(plain.rows(), traced.output.rows());
  EXPECT_EQ(0, std::memcmp(plain.data(), traced.output.data(), sizeof(double) * static_cast<std::size_t>(plain.size())));
}

TEST(Hgt, BackwardShapesMatchParameters) {
  HgtConfig cfg{8, 4, 3, 2};
  const auto p = init_hgt_params(2, cfg);
  PromptGraph g(random_matrix(4, 4, 8));
  const auto enc = encode_traced(g, p);
  const auto grads = backward(g, p, enc.tape, Matrix::Ones(enc.output.rows(), enc.output.cols()));
  const auto pt = p.tensors();
  const auto gt = grads.params.tensors();
  ASSERT_EQ(pt.size(), gt.size());
  for (std::size_t i = 0; i < pt.size(); ++i) {
    EXPECT_EQ(pt[i].name, gt[i].name);
    EXPECT_EQ(pt[i].shape, gt[i].shape) << pt[i].name;
  }
  EXPECT_EQ(grads.input.rows(), g.embeddings().rows());
  EXPECT_EQ(grads.input.cols(), g.embeddings().cols());
}

class HgtGradient : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(HgtGradient, MatchesCentralDifferences) {
  const std::uint64_t seed = GetParam();
  HgtConfig cfg{8, 2, 2, 1};
  HgtParams p = randomized_params(seed, cfg);
  const Matrix x0 = random_matrix(seed + 100, 5, 8);
  const Matrix weights = random_matrix(seed + 200, 5, 8);
  auto loss = [&](const Matrix& x) { return (encode(PromptGraph(x), p).array() * weights.array()).sum(); };

  const PromptGraph g(x0);
  const auto enc = encode_traced(g, p);
  const auto grads = backward(g, p, enc.tape, weights);

  auto pt = p.tensors();
  const auto gt = grads.params.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    const double err = max_fd_error(pt[k].values, gt[k].values, [&] { return loss(x0); });
    EXPECT_LT(err, 1e-4) << pt[k].name;
  }
  Matrix x = x0;
  const double err = max_fd_error({x.data(), static_cast<std::size_t>(x.size())},
                                  {grads.input.data(), static_cast<std::size_t>(grads.input.size())},
                                  [&] { return loss(x); });
  EXPECT_LT(err, 1e-4) << "input";
}

INSTANTIATE_TEST_SUITE_P(FiveSeeds, HgtGradient, ::testing::Values(1, 2, 3, 4, 5));

TEST(Hgt, DeeperMlpGradient) {
  HgtConfig cfg{4, 2, 1, 3};
  HgtParams p = randomized_params(9, cfg);
  const Matrix x0 = random_matrix(10, 3, 4);
  const PromptGraph g(x0);
  const auto enc = encode_traced(g, p);
  const auto grads = backward(g, p, enc.tape, Matrix::Ones(3, 4));
  auto pt = p.tensors();
  const auto gt = grads.params.tensors();
  for (std::size_t k = 0; k < pt.size(); ++k) {
    EXPECT_LT(max_fd_error(pt[k].values, gt[k].values, [&] { return encode(g, p).sum(); }), 1e-4) << pt[k].name;
  }
}

TEST(Hgt, InitIsDeterministicWithUnitMu) {
  HgtConfig cfg{16, 4, 2, 1};
  const auto a = init_hgt_params(77, cfg);
  const auto b = init_hgt_params(77, cfg);
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t k = 0; k < ta.size(); ++k) {
    EXPECT_TRUE(std::equal(ta[k].values.begin(), ta[k].values.end(), tb[k].values.begin())) << ta[k].name;
  }
  for (const auto& layer : a.layers) {
    EXPECT_TRUE((layer.mu.array() == 1.0).all());
    for (const auto& bias : layer.mlp_bias) EXPECT_TRUE((bias.array() == 0.0).all());
  }
}

TEST(Hgt, InitSpreadMatchesUniformBound) {
  HgtConfig cfg{64, 2, 1, 1};
  const auto p = init_hgt_params(5, cfg);
  const Matrix& block = p.layers[0].q_lin[0][0];
  ASSERT_EQ(block.rows(), 64);
  ASSERT_EQ(block.cols(), 32);
  const double s = std::sqrt(6.0 / 96.0);
  const double mean = block.mean();
  const double sd = std::sqrt((block.array() - mean).square().sum() / static_cast<double>(block.size() - 1));
  EXPECT_NEAR(sd, s / std::sqrt(3.0), 0.1 * s / std::sqrt(3.0));
  EXPECT_LE(block.cwiseAbs().maxCoeff(), s);
}

TEST(Hgt, AttentionWeightsSumToOne) {
  HgtConfig cfg{8, 2, 2, 1};
  const auto p = randomized_params(4, cfg);
  const auto enc = encode_traced(PromptGraph(random_matrix(6, 6, 8)), p);
  for (const auto& layer : enc.tape.layers) {
    for (const auto& target : layer.weights) {
      for (std::size_t h = 0; h < cfg.heads; ++h) {
        double sum = 0.0;
        for (const auto& slot : target) sum += slot[h];
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
    }
  }
}

TEST(Hgt, PermutationEquivariant) {
  HgtConfig cfg{8, 2, 2, 1};
  const auto p = randomized_params(8, cfg);
  const Matrix x0 = random_matrix(21, 5, 8);
  const std::vector<Eigen::Index> perm{2, 0, 3, 1};
  Matrix shuffled = x0;
  for (Eigen::Index i = 0; i < 4; ++i) shuffled.row(i) = x0.row(perm[static_cast<std::size_t>(i)]);
  const Matrix a = encode(PromptGraph(x0), p);
  const Matrix b = encode(PromptGraph(shuffled), p);
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_TRUE(b.row(i).isApprox(a.row(perm[static_cast<std::size_t>(i)]), 1e-12)) << i;
  }
  EXPECT_TRUE(b.row(4).isApprox(a.row(4), 1e-12));
}

TEST(Hgt, ScalingMuKeepsWeightOrder) {
  HgtConfig cfg{8, 2, 1, 1};
  auto p = randomized_params(13, cfg);
  p.layers[0].mu.setConstant(0.7);
  const PromptGraph g(random_matrix(14, 5, 8));
  const auto before = encode_traced(g, p);
  p.layers[0].mu *= 3.0;
  const auto after = encode_traced(g, p);
  const auto& w0 = before.tape.layers[0].weights;
  const auto& w1 = after.tape.layers[0].weights;
  for (std::size_t j = 0; j < w0.size(); ++j) {
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      for (std::size_t a = 0; a < w0[j].size(); ++a) {
        for (std::size_t b = 0; b < w0[j].size(); ++b) {
          if (w0[j][a][h] < w0[j][b][h]) EXPECT_LT(w1[j][a][h], w1[j][b][h]);
        }
      }
    }
  }
}

TEST(Hgt, CountsInvocations) {
  HgtConfig cfg{4, 2, 1, 1};
  const auto p = init_hgt_params(1, cfg);
  const PromptGraph g(random_matrix(1, 3, 4));
  const auto before = encode_invocations();
  encode(g, p);
  encode_traced(g, p);
  EXPECT_EQ(encode_invocations(), before + 2);
}

}  // namespace
}  // namespace grlp
