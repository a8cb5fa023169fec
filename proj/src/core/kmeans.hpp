#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"

namespace mvc {

struct KmeansOptions {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

struct ClusteringResult {
  std::vector<std::uint32_t> labels;  // one id in [0, k) per row
  DenseMatrix centers;                // k x d
  double inertia = 0.0;               // sum of squared distances to assigned centers
};

/// Lloyd iterations from k-means++ seeding, best of n_init restarts by
/// (inertia, restart index). Empty clusters are repaired by reassigning the
/// point farthest from its current center. Deterministic under seed.
ClusteringResult kmeans(const DenseMatrix& points, const KmeansOptions& opts);

}  // namespace mvc
