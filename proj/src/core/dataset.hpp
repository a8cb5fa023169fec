#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace mvc {

/// V aligned feature matrices over the same samples, with optional ground
/// truth labels and a per-sample/per-view availability mask. Loaded datasets
/// are immutable in practice; every transform returns a copy.
struct MultiViewDataset {
  std::string name;
  std::vector<DenseMatrix> views;       // view v is n_samples x view_dims[v]
  std::vector<std::uint32_t> labels;    // empty, or one id in [0, K) per sample
  std::vector<std::uint8_t> mask;       // n_samples x n_views row-major, 1 = present
  std::size_t n_clusters = 0;           // K, 0 when labels are absent
  std::string config_hash;              // round-tripped through save/load when set

  std::size_t n_samples() const { return views.empty() ? 0 : views[0].rows; }
  std::size_t n_views() const { return views.size(); }
  bool has_labels() const { return !labels.empty(); }
  bool view_present(std::size_t i, std::size_t v) const { return mask[i * n_views() + v] != 0; }
  bool fully_observed() const;

  /// Enforce the structural invariants (aligned row counts, no empty mask
  /// rows, label ids covering [0, K)). Throws on violation.
  void validate() const;
};

struct SyntheticSpec {
  std::size_t n_samples = 300;
  std::size_t n_clusters = 3;
  std::size_t n_views = 3;
  std::size_t latent_dim = 10;
  std::vector<std::size_t> view_dims;  // empty means 40 per view
  double cluster_separation = 10.0;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<std::size_t> resolved_view_dims() const;
};

/// Gaussian clusters in a latent space, pushed through one random linear map
/// per view plus view noise. The minimum pairwise center distance equals
/// cluster_separation. Pure function of the spec.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

/// Mark round(missing_rate * n) samples incomplete by removing a uniformly
/// chosen nonempty proper subset of their views; removed rows are zero-filled
/// and flagged in the mask, so every sample keeps at least one view.
MultiViewDataset apply_missing_mask(const MultiViewDataset& ds, double missing_rate,
                                    std::uint64_t seed);

/// Dataset directory: manifest.txt + view_###.mvds per view + optional
/// labels.bin / mask.bin. Round-trips byte-identically.
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);
MultiViewDataset load_dataset(const std::filesystem::path& dir);

struct ViewColumnStats {
  std::vector<double> col_min;
  std::vector<double> col_max;
};

struct NormalizeStats {
  std::vector<ViewColumnStats> per_view;
};

/// Rescale every view column to [0, 1] using only rows whose view is present;
/// constant columns map to 0 and masked rows stay zero-filled.
MultiViewDataset normalize_minmax(const MultiViewDataset& ds, NormalizeStats* stats = nullptr);

/// One CSV file per view (comma-separated doubles, optional single header
/// line) and an optional single-column integer label file.
MultiViewDataset import_csv(const std::vector<std::filesystem::path>& view_files,
                            const std::filesystem::path& labels_file, bool has_header,
                            const std::string& name);

}  // namespace mvc
