#pragma once

// Independent brute-force oracles used by the test suites. Everything here is
// written with plain loops and scalar arithmetic, sharing no code with the
// library paths it checks.

#include <cmath>
#include <cstddef>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace oracle {

inline mvc::DenseMatrix matmul(const mvc::DenseMatrix& a, const mvc::DenseMatrix& b) {
  mvc::DenseMatrix out(a.rows, b.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  return out;
}

inline mvc::DenseMatrix random_matrix(mvc::Rng& rng, std::size_t r, std::size_t c,
                                      double scale = 1.0) {
  mvc::DenseMatrix m(r, c);
  for (double& v : m.data) v = rng.normal() * scale;
  return m;
}

// Row-wise softmax with textbook arithmetic.
inline mvc::DenseMatrix softmax_rows(const mvc::DenseMatrix& a) {
  mvc::DenseMatrix out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double m = a.at(i, 0);
    for (std::size_t j = 1; j < a.cols; ++j) m = std::max(m, a.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) denom += std::exp(a.at(i, j) - m);
    for (std::size_t j = 0; j < a.cols; ++j) out.at(i, j) = std::exp(a.at(i, j) - m) / denom;
  }
  return out;
}

inline double cosine(const double* a, const double* b, std::size_t d) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12) na = 1e-12;
  if (nb < 1e-12) nb = 1e-12;
  return dot / (na * nb);
}

}  // namespace oracle
