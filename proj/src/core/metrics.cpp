#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"

namespace mvc {

namespace {

void check_lengths(const std::vector<std::uint32_t>& pred,
                   const std::vector<std::uint32_t>& truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("metrics: " + std::to_string(pred.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " truth labels");
  }
  if (pred.empty()) throw DomainError("metrics: empty label vectors");
}

std::size_t label_count(const std::vector<std::uint32_t>& labels) {
  std::uint32_t m = 0;
  for (std::uint32_t l : labels) m = std::max(m, l);
  return static_cast<std::size_t>(m) + 1;
}

std::vector<std::vector<double>> contingency(const std::vector<std::uint32_t>& pred,
                                             const std::vector<std::uint32_t>& truth,
                                             std::size_t kp, std::size_t kt) {
  std::vector<std::vector<double>> c(kp, std::vector<double>(kt, 0.0));
  for (std::size_t i = 0; i < pred.size(); ++i) c[pred[i]][truth[i]] += 1.0;
  return c;
}

}  // namespace

std::vector<std::size_t> hungarian_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw ShapeError("hungarian: cost matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  // Potential-based O(n^3) formulation; rows and columns are 1-indexed with a
  // virtual 0 slot.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> match(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  }
  return match;
}

double clustering_accuracy(const std::vector<std::uint32_t>& pred,
                           const std::vector<std::uint32_t>& truth) {
  check_lengths(pred, truth);
  const std::size_t kp = label_count(pred), kt = label_count(truth);
  const std::size_t k = std::max(kp, kt);
  const auto counts = contingency(pred, truth, kp, kt);
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) cost[i][j] = -counts[i][j];
  const auto match = hungarian_assignment(cost);
  double matched = 0.0;
  for (std::size_t i = 0; i < kp; ++i) {
    if (match[i] < kt) matched += counts[i][match[i]];
  }
  return matched / static_cast<double>(pred.size());
}

double normalized_mutual_information(const std::vector<std::uint32_t>& pred,
                                     const std::vector<std::uint32_t>& truth) {
  check_lengths(pred, truth);
  const std::size_t kp = label_count(pred), kt = label_count(truth);
  const auto c = contingency(pred, truth, kp, kt);
  const double n = static_cast<double>(pred.size());

  // Equivalent partitions (a bijection between nonzero rows and columns)
  // score exactly 1 by definition, covering the single-cluster case as well.
  bool equivalent = kp == kt;
  if (equivalent) {
    for (std::size_t i = 0; i < kp && equivalent; ++i) {
      std::size_t nonzero = 0;
      for (std::size_t j = 0; j < kt; ++j) nonzero += c[i][j] > 0.0 ? 1 : 0;
      equivalent = nonzero == 1;
    }
    for (std::size_t j = 0; j < kt && equivalent; ++j) {
      std::size_t nonzero = 0;
      for (std::size_t i = 0; i < kp; ++i) nonzero += c[i][j] > 0.0 ? 1 : 0;
      equivalent = nonzero == 1;
    }
  }
  if (equivalent) return 1.0;

  std::vector<double> a(kp, 0.0), b(kt, 0.0);
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) {
      a[i] += c[i][j];
      b[j] += c[i][j];
    }
  double hp = 0.0, ht = 0.0, mi = 0.0;
  for (std::size_t i = 0; i < kp; ++i)
    if (a[i] > 0.0) hp -= a[i] / n * std::log(a[i] / n);
  for (std::size_t j = 0; j < kt; ++j)
    if (b[j] > 0.0) ht -= b[j] / n * std::log(b[j] / n);
  if (hp == 0.0 || ht == 0.0) return 0.0;
  for (std::size_t i = 0; i < kp; ++i)
    for (std::size_t j = 0; j < kt; ++j) {
      if (c[i][j] > 0.0) mi += c[i][j] / n * std::log(n * c[i][j] / (a[i] * b[j]));
    }
  return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

double purity(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& truth) {
  check_lengths(pred, truth);
  const auto c = contingency(pred, truth, label_count(pred), label_count(truth));
  double total = 0.0;
  for (const auto& row : c) total += *std::max_element(row.begin(), row.end());
  return total / static_cast<double>(pred.size());
}

Metrics evaluate_clustering(const std::vector<std::uint32_t>& pred,
                            const std::vector<std::uint32_t>& truth) {
  return Metrics{clustering_accuracy(pred, truth), normalized_mutual_information(pred, truth),
                 purity(pred, truth)};
}

}  // namespace mvc
