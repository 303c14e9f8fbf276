#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace grlp {

// Row-major storage keeps tensor payloads in checkpoint order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using EmbeddingVector = Eigen::VectorXd;

/// A named, shaped view over parameter storage owned elsewhere.
struct TensorView {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<double> values;
};

struct ConstTensorView {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const double> values;
};

inline TensorView view_of(std::string name, Matrix& m) {
  return {std::move(name),
          {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
          {m.data(), static_cast<std::size_t>(m.size())}};
}

inline TensorView view_of(std::string name, Vector& v) {
  return {std::move(name), {static_cast<std::size_t>(v.size())}, {v.data(), static_cast<std::size_t>(v.size())}};
}

}  // namespace grlp
