#pragma once

#include "grlp/error.hpp"
#include "grlp/rng.hpp"
#include "grlp/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <span>
#include <string>

// Asserts that `stmt` throws grlp::Error of the given kind.
#define EXPECT_GRLP_ERROR(stmt, error_kind)                                     \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "no exception from " #stmt;                              \
    } catch (const ::grlp::Error& e) {                                          \
      EXPECT_EQ(::grlp::to_string(e.kind()), ::grlp::to_string(error_kind)) << e.what(); \
    }                                                                           \
  } while (0)

namespace grlp::testing {

inline nlohmann::json load_json(const std::string& name) {
  std::ifstream in(std::filesystem::path(GRLP_TEST_DATA_DIR) / name);
  return nlohmann::json::parse(in);
}

// Central differences over every entry of `values`, compared with `analytic`.
// Returns the largest relative error, with a floor on the denominator so
// near-zero gradients are compared absolutely.
inline double max_fd_error(std::span<double> values, std::span<const double> analytic,
                           const std::function<double()>& f, double eps = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = f();
    values[i] = saved - eps;
    const double down = f();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

inline Matrix random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace grlp::testing
