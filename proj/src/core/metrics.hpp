#pragma once

#include <cstdint>
#include <vector>

namespace mvc {

struct Metrics {
  double acc = 0.0;
  double nmi = 0.0;
  double pur = 0.0;
};

/// Minimum-cost assignment (Hungarian algorithm) on a square cost matrix;
/// returns the column matched to each row.
std::vector<std::size_t> hungarian_assignment(const std::vector<std::vector<double>>& cost);

/// Clustering accuracy: best matched fraction over cluster-label assignments.
double clustering_accuracy(const std::vector<std::uint32_t>& pred,
                           const std::vector<std::uint32_t>& truth);

/// Normalized mutual information with geometric-mean normalization and
/// natural logs. Equivalent partitions score 1; if either partition carries
/// zero entropy and they are not equivalent, the score is 0.
double normalized_mutual_information(const std::vector<std::uint32_t>& pred,
                                     const std::vector<std::uint32_t>& truth);

/// Fraction of samples in the majority truth class of their predicted cluster.
double purity(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& truth);

Metrics evaluate_clustering(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& truth);

}  // namespace mvc
