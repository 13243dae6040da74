#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace psmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One observation record; width is model specific.
using Row = std::span<const double>;

inline Row row_of(const RowMatrix& rows, Eigen::Index i) {
  return Row(rows.data() + i * rows.cols(), static_cast<std::size_t>(rows.cols()));
}

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

}  // namespace psmc
