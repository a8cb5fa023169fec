#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "rng.hpp"

namespace mvc {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

DenseMatrix kmeanspp_init(const DenseMatrix& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.rows, d = pts.cols;
  DenseMatrix centers(k, d);
  std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());

  std::size_t first = rng.index(n);
  std::copy_n(pts.row(first), d, centers.row(0));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      best_d2[i] = std::min(best_d2[i], sq_dist(pts.row(i), centers.row(c - 1), d));
      total += best_d2[i];
    }
    std::size_t chosen;
    if (total <= 0.0) {
      chosen = rng.index(n);  // all remaining points coincide with a center
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += best_d2[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    }
    std::copy_n(pts.row(chosen), d, centers.row(c));
  }
  return centers;
}

struct RunResult {
  std::vector<std::uint32_t> labels;
  DenseMatrix centers;
  double inertia = 0.0;
};

RunResult lloyd_run(const DenseMatrix& pts, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter, double tol) {
  const std::size_t n = pts.rows, d = pts.cols;
  Rng rng(seed);
  DenseMatrix centers = kmeanspp_init(pts, k, rng);
  std::vector<std::uint32_t> labels(n, 0);
  std::vector<std::size_t> counts(k, 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  double inertia = prev_inertia;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Assign.
    bool changed = false;
    inertia = 0.0;
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d2 = sq_dist(pts.row(i), centers.row(c), d);
        if (d2 < best) {
          best = d2;
          arg = static_cast<std::uint32_t>(c);
        }
      }
      if (arg != labels[i]) changed = true;
      labels[i] = arg;
      counts[arg] += 1;
      inertia += best;
    }

    // Repair empty clusters with the farthest point of a non-singleton
    // cluster.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      double worst = -1.0;
      std::size_t worst_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] < 2) continue;
        const double d2 = sq_dist(pts.row(i), centers.row(labels[i]), d);
        if (d2 > worst) {
          worst = d2;
          worst_i = i;
        }
      }
      counts[labels[worst_i]] -= 1;
      labels[worst_i] = static_cast<std::uint32_t>(c);
      counts[c] = 1;
      changed = true;
    }

    // Inertia under the current centers never increases across iterations.
    if (inertia > prev_inertia + 1e-9 * std::max(1.0, prev_inertia)) {
      throw NumericError("kmeans: inertia increased from " + std::to_string(prev_inertia) +
                         " to " + std::to_string(inertia));
    }
    const bool converged = !changed || (prev_inertia - inertia) <= tol;
    prev_inertia = inertia;

    // Update centers as cluster means.
    std::fill(centers.data.begin(), centers.data.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* c_row = centers.row(labels[i]);
      const double* p_row = pts.row(i);
      for (std::size_t j = 0; j < d; ++j) c_row[j] += p_row[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      for (std::size_t j = 0; j < d; ++j) centers.at(c, j) *= inv;
    }

    if (converged) break;
  }

  // Final inertia against the refreshed centers.
  inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(pts.row(i), centers.row(labels[i]), d);
  return RunResult{std::move(labels), std::move(centers), inertia};
}

}  // namespace

ClusteringResult kmeans(const DenseMatrix& points, const KmeansOptions& opts) {
  if (opts.k == 0) throw DomainError("kmeans: k must be >= 1");
  if (points.rows < opts.k) {
    throw DomainError("kmeans: k = " + std::to_string(opts.k) + " exceeds " +
                      std::to_string(points.rows) + " points");
  }
  RunResult best;
  bool have_best = false;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opts.n_init); ++restart) {
    RunResult run = lloyd_run(points, opts.k, derive_seed(opts.seed, restart), opts.max_iter,
                              opts.tol);
    if (!have_best || run.inertia < best.inertia) {  // ties keep the earlier restart
      best = std::move(run);
      have_best = true;
    }
  }
  return ClusteringResult{std::move(best.labels), std::move(best.centers), best.inertia};
}

}  // namespace mvc
