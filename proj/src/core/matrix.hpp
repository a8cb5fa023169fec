#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace mvc {

/// Plain dense row-major matrix of doubles. This is the inert data type used
/// for datasets, checkpoints and clustering inputs; the autodiff Tensor wraps
/// the same layout.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}
  DenseMatrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw ShapeError("DenseMatrix: " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " needs " +
                       std::to_string(rows * cols) + " values, got " +
                       std::to_string(data.size()));
    }
  }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double* row(std::size_t i) { return data.data() + i * cols; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  bool operator==(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

inline std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace mvc
