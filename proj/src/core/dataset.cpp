#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "keyval.hpp"
#include "mvds.hpp"
#include "rng.hpp"

namespace fs = std::filesystem;

namespace mvc {

bool MultiViewDataset::fully_observed() const {
  return std::all_of(mask.begin(), mask.end(), [](std::uint8_t b) { return b != 0; });
}

void MultiViewDataset::validate() const {
  if (views.empty()) throw DomainError("dataset " + name + ": no views");
  const std::size_t n = views[0].rows;
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows != n) {
      throw ShapeError("dataset " + name + ": view " + std::to_string(v) + " has " +
                       std::to_string(views[v].rows) + " rows, expected " + std::to_string(n));
    }
  }
  if (mask.size() != n * views.size()) {
    throw ShapeError("dataset " + name + ": mask has " + std::to_string(mask.size()) +
                     " entries, expected " + std::to_string(n * views.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t v = 0; v < views.size(); ++v) any = any || view_present(i, v);
    if (!any) {
      throw DomainError("dataset " + name + ": sample " + std::to_string(i) +
                        " has no views present");
    }
  }
  if (!labels.empty()) {
    if (labels.size() != n) {
      throw ShapeError("dataset " + name + ": " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(n) + " samples");
    }
    if (n_clusters == 0) throw DomainError("dataset " + name + ": labels present but K = 0");
    std::vector<bool> seen(n_clusters, false);
    for (std::uint32_t l : labels) {
      if (l >= n_clusters) {
        throw DomainError("dataset " + name + ": label " + std::to_string(l) +
                          " out of range [0," + std::to_string(n_clusters) + ")");
      }
      seen[l] = true;
    }
    for (std::size_t k = 0; k < n_clusters; ++k) {
      if (!seen[k]) {
        throw DomainError("dataset " + name + ": cluster id " + std::to_string(k) +
                          " never occurs");
      }
    }
  }
}

void SyntheticSpec::validate() const {
  if (n_clusters < 2) throw DomainError("synthetic spec: n_clusters must be >= 2");
  if (n_samples < n_clusters) throw DomainError("synthetic spec: n_samples must be >= n_clusters");
  if (n_views < 1) throw DomainError("synthetic spec: n_views must be >= 1");
  if (latent_dim < 1) throw DomainError("synthetic spec: latent_dim must be >= 1");
  if (!view_dims.empty() && view_dims.size() != n_views) {
    throw DomainError("synthetic spec: " + std::to_string(view_dims.size()) +
                      " view dims for " + std::to_string(n_views) + " views");
  }
  for (std::size_t d : resolved_view_dims()) {
    if (d < 1) throw DomainError("synthetic spec: view dims must be >= 1");
  }
  if (cluster_separation < 0.0) throw DomainError("synthetic spec: separation must be >= 0");
  if (noise_sigma < 0.0) throw DomainError("synthetic spec: noise sigma must be >= 0");
}

std::vector<std::size_t> SyntheticSpec::resolved_view_dims() const {
  if (!view_dims.empty()) return view_dims;
  return std::vector<std::size_t>(n_views, 40);
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = spec.n_samples, k = spec.n_clusters, ld = spec.latent_dim;
  const auto dims = spec.resolved_view_dims();

  // Centers: standard normal draws rescaled so the minimum pairwise distance
  // equals cluster_separation (zero separation collapses them all to the
  // origin).
  DenseMatrix centers(k, ld);
  double min_dist = 0.0;
  do {
    for (double& v : centers.data) v = rng.normal();
    min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < ld; ++j) {
          const double diff = centers.at(a, j) - centers.at(b, j);
          d2 += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(d2));
      }
  } while (min_dist < 1e-9);  // essentially never loops
  const double scale = spec.cluster_separation / min_dist;
  for (double& v : centers.data) v *= scale;

  // Balanced sizes, remainder spread over the first clusters; labels assigned
  // in blocks.
  MultiViewDataset ds;
  ds.name = "synthetic";
  ds.n_clusters = k;
  ds.labels.resize(n);
  {
    std::size_t i = 0;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t size = n / k + (c < n % k ? 1 : 0);
      for (std::size_t s = 0; s < size; ++s) ds.labels[i++] = static_cast<std::uint32_t>(c);
    }
  }

  DenseMatrix latent(n, ld);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < ld; ++j)
      latent.at(i, j) = centers.at(ds.labels[i], j) + rng.normal();

  const double map_scale = 1.0 / std::sqrt(static_cast<double>(ld));
  for (std::size_t v = 0; v < spec.n_views; ++v) {
    DenseMatrix map(ld, dims[v]);
    for (double& x : map.data) x = rng.normal() * map_scale;
    DenseMatrix view(n, dims[v]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dims[v]; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < ld; ++l) acc += latent.at(i, l) * map.at(l, j);
        view.at(i, j) = acc;
      }
    for (double& x : view.data) x += spec.noise_sigma * rng.normal();
    ds.views.push_back(std::move(view));
  }

  ds.mask.assign(n * spec.n_views, 1);
  ds.validate();
  return ds;
}

MultiViewDataset apply_missing_mask(const MultiViewDataset& ds, double missing_rate,
                                    std::uint64_t seed) {
  if (missing_rate < 0.0 || missing_rate > 0.7) {
    throw DomainError("missing rate must lie in [0, 0.7], got " + std::to_string(missing_rate));
  }
  if (ds.n_views() < 2) {
    throw DomainError("missing-view masking needs at least 2 views, dataset has " +
                      std::to_string(ds.n_views()));
  }
  if (!ds.fully_observed()) {
    throw DomainError("dataset " + ds.name + " already has missing views");
  }

  MultiViewDataset out = ds;
  const std::size_t n = ds.n_samples();
  const std::size_t v_count = ds.n_views();
  const std::size_t incomplete = static_cast<std::size_t>(std::llround(missing_rate * n));

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  const std::uint64_t subsets = (std::uint64_t{1} << v_count) - 2;  // nonempty proper
  for (std::size_t s = 0; s < incomplete; ++s) {
    const std::size_t i = order[s];
    const std::uint64_t removed = 1 + rng.index(subsets);
    for (std::size_t v = 0; v < v_count; ++v) {
      if (removed & (std::uint64_t{1} << v)) {
        out.mask[i * v_count + v] = 0;
        double* row = out.views[v].row(i);
        std::fill_n(row, out.views[v].cols, 0.0);
      }
    }
  }
  out.validate();
  return out;
}

namespace {

std::string view_file_name(std::size_t v) {
  std::ostringstream ss;
  ss << "view_";
  ss.width(3);
  ss.fill('0');
  ss << v;
  ss << ".mvds";
  return ss.str();
}

}  // namespace

void save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);

  std::ostringstream manifest;
  manifest << "# multi-view dataset\n";
  manifest << "name = " << ds.name << "\n";
  manifest << "n_views = " << ds.n_views() << "\n";
  manifest << "n_samples = " << ds.n_samples() << "\n";
  manifest << "n_clusters = " << ds.n_clusters << "\n";
  manifest << "view_dims =";
  for (const auto& v : ds.views) manifest << " " << v.cols;
  manifest << "\n";
  manifest << "view_files =";
  for (std::size_t v = 0; v < ds.n_views(); ++v) manifest << " " << view_file_name(v);
  manifest << "\n";
  if (ds.has_labels()) manifest << "labels_file = labels.bin\n";
  manifest << "mask_file = mask.bin\n";
  if (!ds.config_hash.empty()) manifest << "config_hash = " << ds.config_hash << "\n";
  write_text_file(dir / "manifest.txt", manifest.str());

  for (std::size_t v = 0; v < ds.n_views(); ++v) {
    write_matrix_file(dir / view_file_name(v), ds.views[v]);
  }
  if (ds.has_labels()) write_labels_file(dir / "labels.bin", ds.labels);
  write_mask_file(dir / "mask.bin", ds.mask);
}

MultiViewDataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a dataset directory");
  const fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) throw IoError(dir.string() + ": manifest.txt missing");

  std::size_t n_views = 0, n_samples = 0;
  MultiViewDataset ds;
  std::vector<std::size_t> view_dims;
  std::vector<std::string> view_files;
  std::string labels_file, mask_file;
  for (const auto& [key, value] : read_keyval_file(manifest_path)) {
    if (key == "name") ds.name = value;
    else if (key == "n_views") n_views = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "n_samples") n_samples = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "n_clusters") ds.n_clusters = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "view_dims") {
      for (const auto& tok : split_ws(value))
        view_dims.push_back(static_cast<std::size_t>(parse_int(tok, key)));
    } else if (key == "view_files") {
      view_files = split_ws(value);
    } else if (key == "labels_file") {
      labels_file = value;
    } else if (key == "mask_file") {
      mask_file = value;
    } else if (key == "config_hash") {
      ds.config_hash = value;
    } else {
      throw ConfigError(manifest_path.string() + ": unknown key \"" + key + "\"");
    }
  }

  if (n_views == 0) throw ConfigError(manifest_path.string() + ": n_views missing or zero");
  if (view_files.size() != n_views) {
    throw ConfigError(manifest_path.string() + ": manifest declares " + std::to_string(n_views) +
                      " views but lists " + std::to_string(view_files.size()) + " view files");
  }
  if (view_dims.size() != n_views) {
    throw ConfigError(manifest_path.string() + ": manifest declares " + std::to_string(n_views) +
                      " views but lists " + std::to_string(view_dims.size()) + " view dims");
  }

  // The directory must agree with the manifest about how many view matrices
  // exist.
  std::size_t present = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.rfind("view_", 0) == 0 && fname.size() >= 5 &&
        entry.path().extension() == ".mvds") {
      ++present;
    }
  }
  if (present != n_views) {
    throw ConfigError(dir.string() + ": manifest declares " + std::to_string(n_views) +
                      " views but the directory holds " + std::to_string(present) +
                      " view matrix files");
  }

  for (std::size_t v = 0; v < n_views; ++v) {
    DenseMatrix m = read_matrix_file(dir / view_files[v]);
    if (m.rows != n_samples || m.cols != view_dims[v]) {
      throw ConfigError(dir.string() + ": view " + std::to_string(v) + " is " +
                        shape_str(m.rows, m.cols) + " but the manifest declares " +
                        shape_str(n_samples, view_dims[v]));
    }
    ds.views.push_back(std::move(m));
  }
  if (!labels_file.empty()) {
    ds.labels = read_labels_file(dir / labels_file);
    if (ds.labels.size() != n_samples) {
      throw ConfigError(dir.string() + ": " + std::to_string(ds.labels.size()) +
                        " labels for " + std::to_string(n_samples) + " samples");
    }
  }
  if (!mask_file.empty()) {
    ds.mask = read_mask_file(dir / mask_file, n_samples * n_views);
  } else {
    ds.mask.assign(n_samples * n_views, 1);
  }
  ds.validate();
  return ds;
}

MultiViewDataset normalize_minmax(const MultiViewDataset& ds, NormalizeStats* stats) {
  MultiViewDataset out = ds;
  NormalizeStats local;
  for (std::size_t v = 0; v < ds.n_views(); ++v) {
    const DenseMatrix& src = ds.views[v];
    DenseMatrix& dst = out.views[v];
    ViewColumnStats cs;
    cs.col_min.assign(src.cols, 0.0);
    cs.col_max.assign(src.cols, 0.0);
    for (std::size_t j = 0; j < src.cols; ++j) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < src.rows; ++i) {
        if (!ds.view_present(i, v)) continue;
        lo = std::min(lo, src.at(i, j));
        hi = std::max(hi, src.at(i, j));
      }
      if (!std::isfinite(lo)) lo = hi = 0.0;  // view never observed
      cs.col_min[j] = lo;
      cs.col_max[j] = hi;
      const double range = hi - lo;
      for (std::size_t i = 0; i < src.rows; ++i) {
        if (!ds.view_present(i, v)) continue;  // masked rows stay zero-filled
        dst.at(i, j) = range > 0.0 ? (src.at(i, j) - lo) / range : 0.0;
      }
    }
    local.per_view.push_back(std::move(cs));
  }
  if (stats != nullptr) *stats = std::move(local);
  return out;
}

namespace {

DenseMatrix read_csv_matrix(const fs::path& path, bool has_header) {
  const std::string text = read_text_file(path);
  std::istringstream stream(text);
  std::string line;
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, lineno = 0;
  bool skipped_header = !has_header;
  while (std::getline(stream, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = split_on(line, ',');
    if (cols == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw IoError(path.string() + ": line " + std::to_string(lineno) + " has " +
                    std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
    }
    for (const auto& f : fields) {
      data.push_back(parse_double(f, path.string() + ": line " + std::to_string(lineno)));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path.string() + ": no data rows");
  return DenseMatrix(rows, cols, std::move(data));
}

}  // namespace

MultiViewDataset import_csv(const std::vector<fs::path>& view_files,
                            const fs::path& labels_file, bool has_header,
                            const std::string& name) {
  if (view_files.empty()) throw DomainError("import_csv: no view files given");
  MultiViewDataset ds;
  ds.name = name;
  for (const auto& path : view_files) ds.views.push_back(read_csv_matrix(path, has_header));
  const std::size_t n = ds.views[0].rows;
  for (std::size_t v = 1; v < ds.views.size(); ++v) {
    if (ds.views[v].rows != n) {
      throw ShapeError("import_csv: " + view_files[v].string() + " has " +
                       std::to_string(ds.views[v].rows) + " rows, expected " + std::to_string(n));
    }
  }
  if (!labels_file.empty()) {
    DenseMatrix raw = read_csv_matrix(labels_file, has_header);
    if (raw.cols != 1) {
      throw ShapeError("import_csv: label file must have one column, got " +
                       std::to_string(raw.cols));
    }
    if (raw.rows != n) {
      throw ShapeError("import_csv: " + std::to_string(raw.rows) + " labels for " +
                       std::to_string(n) + " samples");
    }
    std::uint32_t max_label = 0;
    for (double v : raw.data) {
      if (v < 0.0 || v != std::floor(v)) {
        throw DomainError("import_csv: labels must be nonnegative integers, got " +
                          std::to_string(v));
      }
      const auto l = static_cast<std::uint32_t>(v);
      ds.labels.push_back(l);
      max_label = std::max(max_label, l);
    }
    ds.n_clusters = max_label + 1;
  }
  ds.mask.assign(n * ds.n_views(), 1);
  ds.validate();
  return ds;
}

}  // namespace mvc
