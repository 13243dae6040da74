#pragma once

#include <initializer_list>
#include <memory>
#include <random>

#include "psmc/model_core.hpp"

namespace psmc::testing {

inline RowMatrix rows_of(std::initializer_list<std::initializer_list<double>> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  const auto w = static_cast<Eigen::Index>(values.begin()->size());
  RowMatrix out(n, w);
  Eigen::Index i = 0;
  for (const auto& r : values) {
    Eigen::Index j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

inline RowMatrix column_of(std::initializer_list<double> values) {
  RowMatrix out(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) out(i++, 0) = v;
  return out;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Dataset dataset_of(RowMatrix rows) {
  Dataset d;
  d.rows = std::move(rows);
  for (Eigen::Index j = 0; j < d.rows.cols(); ++j) d.columns.push_back("c" + std::to_string(j));
  return d;
}

}  // namespace psmc::testing
