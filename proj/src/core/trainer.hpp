#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adam.hpp"
#include "dataset.hpp"
#include "kmeans.hpp"
#include "losses.hpp"
#include "metrics.hpp"
#include "model.hpp"

namespace mvc {

enum class Ablation { kFull, kNoGcfagg, kNoSgcl };

Ablation parse_ablation(const std::string& name);
std::string ablation_name(Ablation a);

struct TrainConfig {
  std::size_t pretrain_epochs = 200;
  std::size_t finetune_epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 5e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  LossConfig loss;
  Ablation ablation = Ablation::kFull;
  std::size_t eval_every = 0;        // epochs between metric evaluations, 0 = off
  std::size_t eval_chunk_cap = 20000;

  void validate() const;
};

struct EpochRecord {
  std::string phase;  // "pretrain" or "finetune"
  std::size_t epoch = 0;
  double mean_recon = 0.0;     // per-sample mean of the reconstruction loss
  double mean_contrast = 0.0;  // per-sample mean of the contrastive loss
  double mean_total = 0.0;
  long clamp_count = 0;
  double seconds = 0.0;
  bool has_metrics = false;
  Metrics metrics;
};

struct TrainLog {
  std::vector<EpochRecord> records;
};

/// Reconstruction-only warm-up of the autoencoders, mini-batch Adam with a
/// seeded shuffle per epoch (last partial batch kept).
TrainLog pretrain(GcfaggModel& model, const MultiViewDataset& data, const TrainConfig& cfg);

/// Joint optimization of the total objective over all parameters. Initializes
/// the fusion stage (aggregation weights and projectors) if it is not ready.
/// When optimizer_out is given it receives the final optimizer state for
/// checkpointing.
TrainLog finetune(GcfaggModel& model, const MultiViewDataset& data, const TrainConfig& cfg,
                  Adam* optimizer_out = nullptr);

struct EmbeddingResult {
  DenseMatrix z;         // n x d concatenated view representations
  DenseMatrix h_concat;  // n x (V * d_h) concatenated projections
  DenseMatrix h_hat;     // n x d_h consensus representation
};

/// Inference pass over the whole dataset; when it exceeds chunk_cap rows the
/// pass runs in chunks and the structure matrix is restricted to each chunk.
EmbeddingResult compute_embeddings(const GcfaggModel& model, const MultiViewDataset& data,
                                   std::size_t chunk_cap);

struct EvalResult {
  ClusteringResult clustering;
  bool has_metrics = false;
  Metrics metrics;
};

/// k-means readout on the consensus representation plus the metric triple
/// when ground truth is available.
EvalResult evaluate_model(const GcfaggModel& model, const MultiViewDataset& data, std::size_t k,
                          std::uint64_t kmeans_seed, std::size_t chunk_cap);

}  // namespace mvc
