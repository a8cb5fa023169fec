/* Multi-view clustering via global/cross-view feature aggregation and
 * structure-guided contrastive training.
 *
 * C interface over the C++ core: opaque handles, integer status codes, and a
 * thread-local error message. Every function returns MVC_OK on success; on
 * failure the out-parameters are untouched and mvc_last_error() describes the
 * problem.
 */

#ifndef GCFAGGMVC_H
#define GCFAGGMVC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvc_status {
  MVC_OK = 0,
  MVC_ERR_ARGUMENT = 1, /* invalid arguments, config keys or preconditions */
  MVC_ERR_IO = 2,       /* unreadable, unwritable or malformed files */
  MVC_ERR_SHAPE = 3,    /* dimension mismatches */
  MVC_ERR_NUMERIC = 4,  /* non-finite values or diverging optimization */
  MVC_ERR_INTERNAL = 5
} mvc_status;

const char* mvc_version(void);
const char* mvc_status_name(mvc_status status);
/* Message for the most recent failure on this thread ("" if none). */
const char* mvc_last_error(void);

typedef struct mvc_dataset mvc_dataset;
typedef struct mvc_config mvc_config;

typedef struct mvc_metrics {
  double acc;
  double nmi;
  double pur;
  int valid; /* 0 when the dataset carries no ground-truth labels */
} mvc_metrics;

typedef struct mvc_synthetic_spec {
  uint32_t n_samples;
  uint32_t n_clusters;
  uint32_t n_views;
  uint32_t latent_dim;        /* 0 for the default (10) */
  const uint32_t* view_dims;  /* optional, length n_views; NULL for 40 each */
  double cluster_separation;  /* minimum pairwise center distance */
  double noise_sigma;
  uint64_t seed;
} mvc_synthetic_spec;

/* ------------------------------------------------------------------ data */

mvc_status mvc_dataset_generate(const mvc_synthetic_spec* spec, mvc_dataset** out);
mvc_status mvc_dataset_load(const char* dir, mvc_dataset** out);
mvc_status mvc_dataset_import_csv(const char* const* view_csv_paths, uint32_t n_views,
                                  const char* labels_csv_path /* may be NULL */,
                                  int has_header, const char* name, mvc_dataset** out);
mvc_status mvc_dataset_save(const mvc_dataset* ds, const char* dir);

/* Mark round(rate * n) samples incomplete, removing a random nonempty proper
 * subset of views per sample; rate in [0, 0.7]. In place. */
mvc_status mvc_dataset_apply_missing_mask(mvc_dataset* ds, double rate, uint64_t seed);
/* Per-view column min-max rescaling to [0, 1], in place. */
mvc_status mvc_dataset_normalize_minmax(mvc_dataset* ds);
/* Stamp a config hash into the dataset manifest on the next save. */
mvc_status mvc_dataset_set_config_hash(mvc_dataset* ds, const char* hash);

uint32_t mvc_dataset_num_samples(const mvc_dataset* ds);
uint32_t mvc_dataset_num_views(const mvc_dataset* ds);
uint32_t mvc_dataset_num_clusters(const mvc_dataset* ds);
int mvc_dataset_has_labels(const mvc_dataset* ds);

/* k-means on the concatenated raw views (the reference baseline). */
mvc_status mvc_dataset_baseline_kmeans(const mvc_dataset* ds, uint64_t seed,
                                       mvc_metrics* out);

void mvc_dataset_free(mvc_dataset* ds);

/* ---------------------------------------------------------------- config */

/* Fresh config with library defaults. */
mvc_status mvc_config_create(mvc_config** out);
/* Parse a key = value file. */
mvc_status mvc_config_load(const char* path, mvc_config** out);
/* Set one key; unknown keys are rejected with MVC_ERR_ARGUMENT. */
mvc_status mvc_config_set(mvc_config* cfg, const char* key, const char* value);
mvc_status mvc_config_save(const mvc_config* cfg, const char* path);
/* FNV-1a hash of the canonical serialization, as a 16-digit hex string. */
mvc_status mvc_config_hash_hex(const mvc_config* cfg, char* buf, size_t buflen);
void mvc_config_free(mvc_config* cfg);

/* ------------------------------------------------------------------ runs */

/* Full pipeline per the config (data prep, pretraining, fine-tuning,
 * evaluation); writes checkpoint/, train_log.csv, metrics.csv and config.txt
 * under the config's "out" directory. */
mvc_status mvc_run_train(const mvc_config* cfg, mvc_metrics* final_metrics);

/* Evaluate a checkpoint on a dataset directory (the checkpoint's recorded
 * preprocessing is reapplied). out_dir may be NULL; k_override 0 uses the
 * stored cluster count. */
mvc_status mvc_run_eval(const char* checkpoint_dir, const char* dataset_dir,
                        const char* out_dir, uint32_t k_override, mvc_metrics* out);

/* Export the concatenated embeddings, projections and consensus
 * representation as MVDS matrices under out_dir. */
mvc_status mvc_run_embed(const char* checkpoint_dir, const char* dataset_dir,
                         const char* out_dir);

/* Train the full model and both ablation arms under the config's "out"
 * directory and write ablate_summary.csv. metrics_out, if non-NULL, must hold
 * room for 3 entries ordered full, no_gcfagg, no_sgcl. */
mvc_status mvc_run_ablate(const mvc_config* cfg, mvc_metrics* metrics_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GCFAGGMVC_H */
