#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "metrics.hpp"
#include "trainer.hpp"

namespace mvc {

/// Flat experiment description. Serializes to key = value text; unknown keys
/// are rejected. The config hash stamped into every output file is FNV-1a
/// over the canonical serialization.
struct ExperimentConfig {
  // data source: a dataset directory, or a synthetic spec when empty
  std::string dataset;
  std::size_t synthetic_n = 300;
  std::size_t synthetic_k = 3;
  std::size_t synthetic_views = 3;
  std::size_t synthetic_latent_dim = 10;
  std::vector<std::size_t> synthetic_view_dims;  // empty means 40 per view
  double synthetic_separation = 10.0;
  double synthetic_noise = 0.1;
  std::uint64_t synthetic_seed = 7;
  double missing_rate = 0.0;
  std::uint64_t missing_seed = 0;
  bool normalize = true;
  std::size_t clusters = 0;  // 0 means take K from the labels

  // model widths
  std::size_t encoder_hidden = 256;
  std::size_t embed_dim = 64;
  std::size_t projector_hidden = 256;
  std::size_t consensus_dim = 128;
  std::size_t ffn_dim = 0;  // 0 means twice the concatenated width

  // optimization
  std::size_t pretrain_epochs = 200;
  std::size_t finetune_epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 5e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  double lambda = 1.0;
  double tau = 0.5;
  double denom_epsilon = 1e-8;
  std::string cl_variant = "sgcl";
  std::string ablation = "full";
  std::size_t eval_every = 0;
  std::size_t eval_chunk_cap = 20000;

  std::string out;

  void set(const std::string& key, const std::string& value);
  std::string canonical_text() const;
  std::uint64_t hash64() const;
  std::string hash_hex() const;
  void validate() const;

  TrainConfig train_config() const;
  SyntheticSpec synthetic_spec() const;

  static ExperimentConfig from_file(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Load or generate, then mask and normalize per the config.
MultiViewDataset prepare_dataset(const ExperimentConfig& cfg);

/// k-means on the raw concatenated views; the reference point quoted when
/// generating data.
EvalResult raw_feature_baseline(const MultiViewDataset& ds, std::uint64_t seed);

struct TrainOutcome {
  bool has_metrics = false;
  Metrics metrics;
  TrainLog log;  // pretrain records followed by finetune records
  std::filesystem::path checkpoint_dir;
  std::filesystem::path log_csv;
  std::filesystem::path metrics_csv;
};

/// Full pipeline: prepare data, pretrain, fine-tune, evaluate, write the
/// checkpoint, training log and metrics under cfg.out.
TrainOutcome run_train(const ExperimentConfig& cfg);

struct EvalOutcome {
  bool has_metrics = false;
  Metrics metrics;
  std::vector<std::uint32_t> predictions;
};

/// Evaluate a checkpoint on a dataset directory, reapplying the training
/// preprocessing recorded in the checkpoint. k_override = 0 uses the stored
/// cluster count. out_dir may be empty.
EvalOutcome run_eval(const std::filesystem::path& checkpoint_dir,
                     const std::filesystem::path& dataset_dir,
                     const std::filesystem::path& out_dir, std::size_t k_override = 0);

/// Export Z, the concatenated projections and the consensus representation as
/// MVDS matrices (plus labels when present) for external analysis.
void run_embed(const std::filesystem::path& checkpoint_dir,
               const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir);

struct AblateRow {
  std::string ablation;
  bool has_metrics = false;
  Metrics metrics;
};

/// run_train once per ablation arm into subdirectories of cfg.out, plus a
/// comparison summary CSV.
std::vector<AblateRow> run_ablate(const ExperimentConfig& cfg);

}  // namespace mvc
