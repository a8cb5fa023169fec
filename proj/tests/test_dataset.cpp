#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/keyval.hpp"
#include "core/kmeans.hpp"
#include "core/metrics.hpp"
#include "core/mvds.hpp"

using namespace mvc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("gcfagg_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SyntheticSpec default_spec() {
  SyntheticSpec spec;
  spec.n_samples = 300;
  spec.n_clusters = 3;
  spec.n_views = 3;
  spec.cluster_separation = 10.0;
  spec.noise_sigma = 0.1;
  spec.seed = 7;
  return spec;
}

DenseMatrix concat_views(const MultiViewDataset& ds) {
  std::size_t total = 0;
  for (const auto& v : ds.views) total += v.cols;
  DenseMatrix out(ds.n_samples(), total);
  std::size_t off = 0;
  for (const auto& v : ds.views) {
    for (std::size_t i = 0; i < v.rows; ++i)
      for (std::size_t j = 0; j < v.cols; ++j) out.at(i, off + j) = v.at(i, j);
    off += v.cols;
  }
  return out;
}

bool file_bytes_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

}  // namespace

TEST_CASE("synthetic generation is bit-deterministic") {
  auto a = generate_synthetic(default_spec());
  auto b = generate_synthetic(default_spec());
  REQUIRE(a.n_views() == 3);
  for (std::size_t v = 0; v < 3; ++v) CHECK(a.views[v].data == b.views[v].data);
  CHECK(a.labels == b.labels);
  CHECK(a.mask == b.mask);
}

TEST_CASE("zero separation collapses the cluster centers") {
  SyntheticSpec spec = default_spec();
  spec.n_samples = 1500;
  spec.cluster_separation = 0.0;
  auto ds = generate_synthetic(spec);

  // With coincident centers the per-cluster means of any view agree up to
  // sampling noise.
  const DenseMatrix& view = ds.views[0];
  std::vector<std::vector<double>> means(3, std::vector<double>(view.cols, 0.0));
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < view.rows; ++i) {
    counts[ds.labels[i]] += 1;
    for (std::size_t j = 0; j < view.cols; ++j) means[ds.labels[i]][j] += view.at(i, j);
  }
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t j = 0; j < view.cols; ++j) means[c][j] /= static_cast<double>(counts[c]);
  for (std::size_t j = 0; j < view.cols; ++j) {
    CHECK(std::abs(means[0][j] - means[1][j]) < 0.35);
    CHECK(std::abs(means[0][j] - means[2][j]) < 0.35);
  }
}

TEST_CASE("default synthetic data is separable by raw-feature k-means") {
  auto ds = generate_synthetic(default_spec());
  auto result = kmeans(concat_views(ds), {.k = 3, .seed = 0});
  const double acc = clustering_accuracy(result.labels, ds.labels);
  CHECK(acc >= 0.95);
}

TEST_CASE("balanced cluster sizes with the remainder up front") {
  SyntheticSpec spec = default_spec();
  spec.n_samples = 11;
  spec.n_clusters = 3;
  auto ds = generate_synthetic(spec);
  std::vector<std::size_t> counts(3, 0);
  for (auto l : ds.labels) counts[l] += 1;
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 4);
  CHECK(counts[2] == 3);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec = default_spec();
  spec.n_clusters = 1;
  CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
  spec = default_spec();
  spec.n_samples = 2;
  CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
  spec = default_spec();
  spec.view_dims = {4, 4};  // wrong count for 3 views
  CHECK_THROWS_AS(generate_synthetic(spec), DomainError);
}

TEST_CASE("missing mask: rate zero is the identity") {
  auto ds = generate_synthetic(default_spec());
  auto masked = apply_missing_mask(ds, 0.0, 5);
  CHECK(masked.mask == ds.mask);
  for (std::size_t v = 0; v < 3; ++v) CHECK(masked.views[v].data == ds.views[v].data);
}

TEST_CASE("missing mask marks exactly the requested fraction") {
  SyntheticSpec spec = default_spec();
  spec.n_samples = 100;
  auto ds = generate_synthetic(spec);
  auto masked = apply_missing_mask(ds, 0.5, 11);

  std::size_t incomplete = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    std::size_t present = 0;
    for (std::size_t v = 0; v < 3; ++v) present += masked.view_present(i, v) ? 1 : 0;
    CHECK(present >= 1);  // never all-false
    if (present < 3) {
      ++incomplete;
      for (std::size_t v = 0; v < 3; ++v) {
        if (!masked.view_present(i, v)) {
          for (std::size_t j = 0; j < masked.views[v].cols; ++j) {
            CHECK(masked.views[v].at(i, j) == 0.0);  // zero-filled
          }
        }
      }
    }
  }
  CHECK(incomplete == 50);
}

TEST_CASE("missing mask is deterministic and validates arguments") {
  auto ds = generate_synthetic(default_spec());
  auto a = apply_missing_mask(ds, 0.3, 42);
  auto b = apply_missing_mask(ds, 0.3, 42);
  CHECK(a.mask == b.mask);

  CHECK_THROWS_AS(apply_missing_mask(ds, 0.71, 1), DomainError);
  CHECK_THROWS_AS(apply_missing_mask(ds, -0.1, 1), DomainError);

  SyntheticSpec spec = default_spec();
  spec.n_views = 1;
  auto single = generate_synthetic(spec);
  CHECK_THROWS_AS(apply_missing_mask(single, 0.2, 1), DomainError);

  CHECK_THROWS_AS(apply_missing_mask(a, 0.1, 1), DomainError);  // already masked
}

TEST_CASE("mask counts hold across rates and seeds") {
  SyntheticSpec spec = default_spec();
  spec.n_samples = 120;
  auto ds = generate_synthetic(spec);
  for (double rate : {0.1, 0.3, 0.7}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      auto masked = apply_missing_mask(ds, rate, seed);
      std::size_t incomplete = 0;
      for (std::size_t i = 0; i < 120; ++i) {
        std::size_t present = 0;
        for (std::size_t v = 0; v < 3; ++v) present += masked.view_present(i, v) ? 1 : 0;
        REQUIRE(present >= 1);
        if (present < 3) ++incomplete;
      }
      CHECK(incomplete == static_cast<std::size_t>(std::llround(rate * 120)));
    }
  }
}

TEST_CASE("save/load round-trips every field and re-serializes byte-identically") {
  auto ds = generate_synthetic(default_spec());
  ds.config_hash = "deadbeef00112233";
  auto masked = apply_missing_mask(ds, 0.2, 3);

  const fs::path dir_a = temp_dir("roundtrip_a");
  const fs::path dir_b = temp_dir("roundtrip_b");
  save_dataset(masked, dir_a);
  auto loaded = load_dataset(dir_a);

  CHECK(loaded.name == masked.name);
  CHECK(loaded.n_clusters == masked.n_clusters);
  CHECK(loaded.labels == masked.labels);
  CHECK(loaded.mask == masked.mask);
  CHECK(loaded.config_hash == masked.config_hash);
  for (std::size_t v = 0; v < 3; ++v) CHECK(loaded.views[v].data == masked.views[v].data);

  save_dataset(loaded, dir_b);
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    CHECK(file_bytes_equal(entry.path(), dir_b / entry.path().filename()));
  }
}

TEST_CASE("truncated matrix files are rejected with byte counts") {
  const fs::path dir = temp_dir("truncated");
  DenseMatrix m(4, 3, 1.5);
  const fs::path file = dir / "m.mvds";
  write_matrix_file(file, m);

  fs::resize_file(file, 16 + 5 * 8);  // drop the tail of the payload
  try {
    read_matrix_file(file);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(16 + 12 * 8)) != std::string::npos);  // expected
    CHECK(msg.find(std::to_string(16 + 5 * 8)) != std::string::npos);   // actual
  }
}

TEST_CASE("bad magic and version are rejected") {
  const fs::path dir = temp_dir("magic");
  const fs::path file = dir / "m.mvds";
  {
    std::ofstream f(file, std::ios::binary);
    f << "NOPE" << std::string(12, '\0');
  }
  CHECK_THROWS_WITH_AS(read_matrix_file(file), doctest::Contains("magic"), IoError);
}

TEST_CASE("extra view matrix files are a consistency error") {
  SyntheticSpec spec = default_spec();
  spec.n_views = 2;
  auto ds = generate_synthetic(spec);
  const fs::path dir = temp_dir("extra_view");
  save_dataset(ds, dir);
  fs::copy_file(dir / "view_001.mvds", dir / "view_002.mvds");
  CHECK_THROWS_WITH_AS(load_dataset(dir), doctest::Contains("2 views"), ConfigError);
}

TEST_CASE("manifest/matrix shape disagreement is rejected") {
  auto ds = generate_synthetic(default_spec());
  const fs::path dir = temp_dir("shape_disagree");
  save_dataset(ds, dir);
  DenseMatrix wrong(10, 5, 0.0);
  write_matrix_file(dir / "view_001.mvds", wrong);
  CHECK_THROWS_AS(load_dataset(dir), ConfigError);
}

TEST_CASE("minmax normalization analytic cases") {
  MultiViewDataset ds;
  ds.name = "tiny";
  ds.views.push_back(DenseMatrix(3, 2, {2.0, 5.0, 4.0, 5.0, 6.0, 5.0}));
  ds.mask.assign(3, 1);

  NormalizeStats stats;
  auto out = normalize_minmax(ds, &stats);
  CHECK(out.views[0].at(0, 0) == 0.0);
  CHECK(out.views[0].at(1, 0) == 0.5);
  CHECK(out.views[0].at(2, 0) == 1.0);
  // Constant column maps to zero.
  CHECK(out.views[0].at(0, 1) == 0.0);
  CHECK(out.views[0].at(2, 1) == 0.0);
  CHECK(stats.per_view[0].col_min[0] == 2.0);
  CHECK(stats.per_view[0].col_max[0] == 6.0);

  auto twice = normalize_minmax(out);
  for (std::size_t i = 0; i < out.views[0].size(); ++i) {
    CHECK(twice.views[0].data[i] == doctest::Approx(out.views[0].data[i]).epsilon(1e-15));
  }
}

TEST_CASE("normalization ignores masked rows and keeps them zero") {
  SyntheticSpec spec = default_spec();
  spec.n_samples = 60;
  auto ds = apply_missing_mask(generate_synthetic(spec), 0.5, 9);
  auto out = normalize_minmax(ds);
  for (std::size_t v = 0; v < out.n_views(); ++v) {
    for (std::size_t i = 0; i < out.n_samples(); ++i) {
      for (std::size_t j = 0; j < out.views[v].cols; ++j) {
        const double val = out.views[v].at(i, j);
        if (!out.view_present(i, v)) {
          CHECK(val == 0.0);
        } else {
          CHECK(val >= 0.0);
          CHECK(val <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("csv import round-trips values, labels and header handling") {
  const fs::path dir = temp_dir("csv");
  write_text_file(dir / "v0.csv", "a,b\n1.0,2.0\n3.0,4.5\n-1.0,0.25\n");
  write_text_file(dir / "v1.csv", "c\n0.5\n1.5\n2.5\n");
  write_text_file(dir / "y.csv", "label\n0\n1\n0\n");

  auto ds = import_csv({dir / "v0.csv", dir / "v1.csv"}, dir / "y.csv", true, "csvset");
  CHECK(ds.n_samples() == 3);
  CHECK(ds.n_views() == 2);
  CHECK(ds.views[0].at(1, 1) == 4.5);
  CHECK(ds.views[1].at(2, 0) == 2.5);
  CHECK(ds.labels == std::vector<std::uint32_t>{0, 1, 0});
  CHECK(ds.n_clusters == 2);
  CHECK(ds.fully_observed());
}

TEST_CASE("csv import rejects ragged and mismatched files") {
  const fs::path dir = temp_dir("csv_bad");
  write_text_file(dir / "ragged.csv", "1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(import_csv({dir / "ragged.csv"}, {}, false, "x"), IoError);

  write_text_file(dir / "v0.csv", "1.0\n2.0\n");
  write_text_file(dir / "v1.csv", "1.0\n2.0\n3.0\n");
  CHECK_THROWS_AS(import_csv({dir / "v0.csv", dir / "v1.csv"}, {}, false, "x"), ShapeError);

  write_text_file(dir / "y.csv", "0\n1\n2\n");
  CHECK_THROWS_AS(import_csv({dir / "v0.csv"}, dir / "y.csv", false, "x"), ShapeError);
}
