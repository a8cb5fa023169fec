#include "gcfaggmvc.h"

#include <cstring>
#include <string>

#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"

namespace {

thread_local std::string t_last_error;

mvc_status fail(mvc_status status, const std::string& message) {
  t_last_error = message;
  return status;
}

// Run a body that may throw and translate the exception into a status code.
template <typename Fn>
mvc_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return MVC_OK;
  } catch (const mvc::ShapeError& e) {
    return fail(MVC_ERR_SHAPE, e.what());
  } catch (const mvc::IoError& e) {
    return fail(MVC_ERR_IO, e.what());
  } catch (const mvc::NumericError& e) {
    return fail(MVC_ERR_NUMERIC, e.what());
  } catch (const mvc::DomainError& e) {
    return fail(MVC_ERR_ARGUMENT, e.what());
  } catch (const mvc::ConfigError& e) {
    return fail(MVC_ERR_ARGUMENT, e.what());
  } catch (const mvc::GraphError& e) {
    return fail(MVC_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(MVC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MVC_ERR_INTERNAL, "unknown error");
  }
}

mvc_metrics to_c_metrics(bool valid, const mvc::Metrics& m) {
  return mvc_metrics{m.acc, m.nmi, m.pur, valid ? 1 : 0};
}

}  // namespace

extern "C" {

struct mvc_dataset {
  mvc::MultiViewDataset rep;
};

struct mvc_config {
  mvc::ExperimentConfig rep;
};

const char* mvc_version(void) { return "1.0.0"; }

const char* mvc_status_name(mvc_status status) {
  switch (status) {
    case MVC_OK: return "ok";
    case MVC_ERR_ARGUMENT: return "argument error";
    case MVC_ERR_IO: return "io error";
    case MVC_ERR_SHAPE: return "shape error";
    case MVC_ERR_NUMERIC: return "numeric error";
    case MVC_ERR_INTERNAL: return "internal error";
  }
  return "?";
}

const char* mvc_last_error(void) { return t_last_error.c_str(); }

mvc_status mvc_dataset_generate(const mvc_synthetic_spec* spec, mvc_dataset** out) {
  if (spec == nullptr || out == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] {
    mvc::SyntheticSpec s;
    s.n_samples = spec->n_samples;
    s.n_clusters = spec->n_clusters;
    s.n_views = spec->n_views;
    if (spec->latent_dim != 0) s.latent_dim = spec->latent_dim;
    if (spec->view_dims != nullptr) {
      s.view_dims.assign(spec->view_dims, spec->view_dims + spec->n_views);
    }
    s.cluster_separation = spec->cluster_separation;
    s.noise_sigma = spec->noise_sigma;
    s.seed = spec->seed;
    *out = new mvc_dataset{mvc::generate_synthetic(s)};
  });
}

mvc_status mvc_dataset_load(const char* dir, mvc_dataset** out) {
  if (dir == nullptr || out == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { *out = new mvc_dataset{mvc::load_dataset(dir)}; });
}

mvc_status mvc_dataset_import_csv(const char* const* view_csv_paths, uint32_t n_views,
                                  const char* labels_csv_path, int has_header,
                                  const char* name, mvc_dataset** out) {
  if (view_csv_paths == nullptr || out == nullptr || name == nullptr) {
    return fail(MVC_ERR_ARGUMENT, "null pointer");
  }
  return guarded([&] {
    std::vector<std::filesystem::path> views;
    for (uint32_t v = 0; v < n_views; ++v) views.emplace_back(view_csv_paths[v]);
    std::filesystem::path labels = labels_csv_path == nullptr ? "" : labels_csv_path;
    *out = new mvc_dataset{mvc::import_csv(views, labels, has_header != 0, name)};
  });
}

mvc_status mvc_dataset_save(const mvc_dataset* ds, const char* dir) {
  if (ds == nullptr || dir == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { mvc::save_dataset(ds->rep, dir); });
}

mvc_status mvc_dataset_apply_missing_mask(mvc_dataset* ds, double rate, uint64_t seed) {
  if (ds == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { ds->rep = mvc::apply_missing_mask(ds->rep, rate, seed); });
}

mvc_status mvc_dataset_normalize_minmax(mvc_dataset* ds) {
  if (ds == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { ds->rep = mvc::normalize_minmax(ds->rep); });
}

mvc_status mvc_dataset_set_config_hash(mvc_dataset* ds, const char* hash) {
  if (ds == nullptr || hash == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  ds->rep.config_hash = hash;
  return MVC_OK;
}

uint32_t mvc_dataset_num_samples(const mvc_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<uint32_t>(ds->rep.n_samples());
}

uint32_t mvc_dataset_num_views(const mvc_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<uint32_t>(ds->rep.n_views());
}

uint32_t mvc_dataset_num_clusters(const mvc_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<uint32_t>(ds->rep.n_clusters);
}

int mvc_dataset_has_labels(const mvc_dataset* ds) {
  return ds != nullptr && ds->rep.has_labels() ? 1 : 0;
}

mvc_status mvc_dataset_baseline_kmeans(const mvc_dataset* ds, uint64_t seed,
                                       mvc_metrics* out) {
  if (ds == nullptr || out == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] {
    mvc::EvalResult result = mvc::raw_feature_baseline(ds->rep, seed);
    *out = to_c_metrics(result.has_metrics, result.metrics);
  });
}

void mvc_dataset_free(mvc_dataset* ds) { delete ds; }

mvc_status mvc_config_create(mvc_config** out) {
  if (out == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  *out = new mvc_config{};
  return MVC_OK;
}

mvc_status mvc_config_load(const char* path, mvc_config** out) {
  if (path == nullptr || out == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { *out = new mvc_config{mvc::ExperimentConfig::from_file(path)}; });
}

mvc_status mvc_config_set(mvc_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    return fail(MVC_ERR_ARGUMENT, "null pointer");
  }
  return guarded([&] { cfg->rep.set(key, value); });
}

mvc_status mvc_config_save(const mvc_config* cfg, const char* path) {
  if (cfg == nullptr || path == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] { cfg->rep.save(path); });
}

mvc_status mvc_config_hash_hex(const mvc_config* cfg, char* buf, size_t buflen) {
  if (cfg == nullptr || buf == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  const std::string hex = cfg->rep.hash_hex();
  if (buflen < hex.size() + 1) return fail(MVC_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buf, hex.c_str(), hex.size() + 1);
  return MVC_OK;
}

void mvc_config_free(mvc_config* cfg) { delete cfg; }

mvc_status mvc_run_train(const mvc_config* cfg, mvc_metrics* final_metrics) {
  if (cfg == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] {
    mvc::TrainOutcome outcome = mvc::run_train(cfg->rep);
    if (final_metrics != nullptr) {
      *final_metrics = to_c_metrics(outcome.has_metrics, outcome.metrics);
    }
  });
}

mvc_status mvc_run_eval(const char* checkpoint_dir, const char* dataset_dir,
                        const char* out_dir, uint32_t k_override, mvc_metrics* out) {
  if (checkpoint_dir == nullptr || dataset_dir == nullptr) {
    return fail(MVC_ERR_ARGUMENT, "null pointer");
  }
  return guarded([&] {
    mvc::EvalOutcome outcome = mvc::run_eval(
        checkpoint_dir, dataset_dir, out_dir == nullptr ? "" : out_dir, k_override);
    if (out != nullptr) *out = to_c_metrics(outcome.has_metrics, outcome.metrics);
  });
}

mvc_status mvc_run_embed(const char* checkpoint_dir, const char* dataset_dir,
                         const char* out_dir) {
  if (checkpoint_dir == nullptr || dataset_dir == nullptr || out_dir == nullptr) {
    return fail(MVC_ERR_ARGUMENT, "null pointer");
  }
  return guarded([&] { mvc::run_embed(checkpoint_dir, dataset_dir, out_dir); });
}

mvc_status mvc_run_ablate(const mvc_config* cfg, mvc_metrics* metrics_out) {
  if (cfg == nullptr) return fail(MVC_ERR_ARGUMENT, "null pointer");
  return guarded([&] {
    std::vector<mvc::AblateRow> rows = mvc::run_ablate(cfg->rep);
    if (metrics_out != nullptr) {
      for (std::size_t i = 0; i < rows.size() && i < 3; ++i) {
        metrics_out[i] = to_c_metrics(rows[i].has_metrics, rows[i].metrics);
      }
    }
  });
}

}  // extern "C"
