#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace mvc {

namespace {

constexpr std::uint64_t kPretrainStream = 0x70;
constexpr std::uint64_t kFinetuneStream = 0x71;
constexpr std::uint64_t kFusionInitStream = 0x42;

struct Batch {
  std::vector<Tensor> x_views;       // constants
  std::vector<std::uint8_t> mask;    // batch_n * V, empty when fully observed
  std::size_t size = 0;
};

Batch make_batch(const MultiViewDataset& ds, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end, bool carry_mask) {
  Batch batch;
  batch.size = end - begin;
  const std::size_t v_count = ds.n_views();
  batch.x_views.reserve(v_count);
  for (std::size_t v = 0; v < v_count; ++v) {
    const DenseMatrix& src = ds.views[v];
    std::vector<double> rows(batch.size * src.cols);
    for (std::size_t b = 0; b < batch.size; ++b) {
      const double* src_row = src.row(order[begin + b]);
      std::copy_n(src_row, src.cols, rows.data() + b * src.cols);
    }
    batch.x_views.push_back(Tensor::from_values(batch.size, src.cols, std::move(rows)));
  }
  if (carry_mask) {
    batch.mask.resize(batch.size * v_count);
    for (std::size_t b = 0; b < batch.size; ++b) {
      for (std::size_t v = 0; v < v_count; ++v) {
        batch.mask[b * v_count + v] = ds.mask[order[begin + b] * v_count + v];
      }
    }
  }
  return batch;
}

void check_finite_loss(const char* phase, std::size_t epoch, std::size_t batch_idx, double lr,
                       double lc, double total) {
  if (std::isfinite(total) && std::isfinite(lr) && std::isfinite(lc)) return;
  std::ostringstream msg;
  msg << phase << ": non-finite loss at epoch " << epoch << ", batch " << batch_idx
      << " (recon=" << lr << ", contrast=" << lc << ", total=" << total << ")";
  throw NumericError(msg.str());
}

void check_finite_params(const char* phase, std::size_t epoch, const std::vector<Tensor>& params) {
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (double v : params[k].values()) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string(phase) + ": parameter " + std::to_string(k) +
                           " contains non-finite values after epoch " + std::to_string(epoch));
      }
    }
  }
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Ablation parse_ablation(const std::string& name) {
  if (name == "full") return Ablation::kFull;
  if (name == "no_gcfagg") return Ablation::kNoGcfagg;
  if (name == "no_sgcl") return Ablation::kNoSgcl;
  throw ConfigError("unknown ablation \"" + name + "\" (expected full, no_gcfagg or no_sgcl)");
}

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoGcfagg: return "no_gcfagg";
    case Ablation::kNoSgcl: return "no_sgcl";
  }
  return "?";
}

void TrainConfig::validate() const {
  loss.validate();
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (batch_size < 2 && finetune_epochs > 0) {
    throw ConfigError("train: batch_size must be >= 2 for contrastive fine-tuning");
  }
  if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
}

TrainLog pretrain(GcfaggModel& model, const MultiViewDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.n_samples() == 0) throw DomainError("pretrain: empty dataset");

  TrainLog log;
  if (cfg.pretrain_epochs == 0) return log;

  Adam adam(model.autoencoder_parameters(),
            {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  Rng rng(derive_seed(cfg.seed, kPretrainStream));
  const std::size_t n = data.n_samples();
  const bool carry_mask = !data.fully_observed();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double recon_sum = 0.0;
    std::size_t batch_idx = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size, ++batch_idx) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      Batch batch = make_batch(data, order, begin, end, carry_mask);
      BatchForward fwd = model.forward_autoencoders(batch.x_views);
      Tensor loss = reconstruction_loss(batch.x_views, fwd.x_hat, batch.mask);
      const double value = loss.item();
      check_finite_loss("pretrain", epoch, batch_idx, value, 0.0, value);
      adam.zero_grad();
      backward(loss);
      adam.step();
      recon_sum += value;
    }
    check_finite_params("pretrain", epoch, adam.params());

    EpochRecord rec;
    rec.phase = "pretrain";
    rec.epoch = epoch;
    rec.mean_recon = recon_sum / static_cast<double>(n);
    rec.mean_total = rec.mean_recon;
    rec.seconds = elapsed_seconds(start);
    log.records.push_back(rec);
  }
  return log;
}

TrainLog finetune(GcfaggModel& model, const MultiViewDataset& data, const TrainConfig& cfg,
                  Adam* optimizer_out) {
  cfg.validate();
  data.validate();
  if (data.n_samples() == 0) throw DomainError("finetune: empty dataset");
  if (!model.fusion_ready()) model.init_fusion(derive_seed(cfg.seed, kFusionInitStream));

  Adam adam(model.all_parameters(),
            {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  TrainLog log;
  if (cfg.finetune_epochs == 0) {
    if (optimizer_out != nullptr) *optimizer_out = std::move(adam);
    return log;
  }

  // The no_sgcl ablation is, by definition, the lambda = 0 run: the same
  // graph is built and the contrastive term is still logged.
  LossConfig loss_cfg = cfg.loss;
  if (cfg.ablation == Ablation::kNoSgcl) loss_cfg.lambda = 0.0;

  Rng rng(derive_seed(cfg.seed, kFinetuneStream));
  const std::size_t n = data.n_samples();
  const bool carry_mask = !data.fully_observed();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= cfg.finetune_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double recon_sum = 0.0, contrast_sum = 0.0, total_sum = 0.0;
    long clamps = 0;
    std::size_t batch_idx = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size, ++batch_idx) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      Batch batch = make_batch(data, order, begin, end, carry_mask);
      BatchForward fwd = model.forward(batch.x_views);
      Tensor recon = reconstruction_loss(batch.x_views, fwd.x_hat, batch.mask);
      SgclResult contrast = sgcl_loss(fwd.h_hat, fwd.h_views, fwd.s, loss_cfg, batch.mask);
      Tensor loss = total_loss(recon, contrast.value, loss_cfg);
      const double lr_v = recon.item(), lc_v = contrast.value.item(), l_v = loss.item();
      check_finite_loss("finetune", epoch, batch_idx, lr_v, lc_v, l_v);
      adam.zero_grad();
      backward(loss);
      adam.step();
      recon_sum += lr_v;
      contrast_sum += lc_v;
      total_sum += l_v;
      clamps += contrast.denom_clamps;
    }
    check_finite_params("finetune", epoch, adam.params());

    EpochRecord rec;
    rec.phase = "finetune";
    rec.epoch = epoch;
    rec.mean_recon = recon_sum / static_cast<double>(n);
    rec.mean_contrast = contrast_sum / static_cast<double>(n);
    rec.mean_total = total_sum / static_cast<double>(n);
    rec.clamp_count = clamps;
    rec.seconds = elapsed_seconds(start);
    if (cfg.eval_every > 0 && data.has_labels() &&
        (epoch % cfg.eval_every == 0 || epoch == cfg.finetune_epochs)) {
      EvalResult eval =
          evaluate_model(model, data, data.n_clusters, cfg.seed, cfg.eval_chunk_cap);
      rec.has_metrics = eval.has_metrics;
      rec.metrics = eval.metrics;
      rec.seconds = elapsed_seconds(start);
    }
    log.records.push_back(rec);
  }
  if (optimizer_out != nullptr) *optimizer_out = std::move(adam);
  return log;
}

EmbeddingResult compute_embeddings(const GcfaggModel& model, const MultiViewDataset& data,
                                   std::size_t chunk_cap) {
  data.validate();
  if (!model.fusion_ready()) throw DomainError("compute_embeddings: fusion stage not initialized");
  if (data.n_views() != model.n_views()) {
    throw ShapeError("compute_embeddings: dataset has " + std::to_string(data.n_views()) +
                     " views but the model expects " + std::to_string(model.n_views()));
  }
  for (std::size_t v = 0; v < data.n_views(); ++v) {
    if (data.views[v].cols != model.config().view_dims[v]) {
      throw ShapeError("compute_embeddings: view " + std::to_string(v) + " has width " +
                       std::to_string(data.views[v].cols) + " but the model expects " +
                       std::to_string(model.config().view_dims[v]));
    }
  }

  const std::size_t n = data.n_samples();
  const std::size_t cap = chunk_cap == 0 ? n : chunk_cap;
  const std::size_t d = model.concat_dim();
  const std::size_t dh = model.config().widths.consensus_dim;
  const std::size_t v_count = data.n_views();

  EmbeddingResult out;
  out.z = DenseMatrix(n, d);
  out.h_concat = DenseMatrix(n, v_count * dh);
  out.h_hat = DenseMatrix(n, dh);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t begin = 0; begin < n; begin += cap) {
    const std::size_t end = std::min(n, begin + cap);
    Batch batch = make_batch(data, order, begin, end, false);
    BatchForward fwd = model.forward(batch.x_views);
    for (std::size_t b = 0; b < batch.size; ++b) {
      std::copy_n(fwd.z.values().data() + b * d, d, out.z.row(begin + b));
      std::copy_n(fwd.h_hat.values().data() + b * dh, dh, out.h_hat.row(begin + b));
      for (std::size_t v = 0; v < v_count; ++v) {
        std::copy_n(fwd.h_views[v].values().data() + b * dh, dh,
                    out.h_concat.row(begin + b) + v * dh);
      }
    }
  }
  return out;
}

EvalResult evaluate_model(const GcfaggModel& model, const MultiViewDataset& data, std::size_t k,
                          std::uint64_t kmeans_seed, std::size_t chunk_cap) {
  if (k == 0) throw DomainError("evaluate_model: cluster count k must be >= 1");
  EmbeddingResult emb = compute_embeddings(model, data, chunk_cap);
  EvalResult result;
  result.clustering = kmeans(emb.h_hat, {.k = k, .seed = kmeans_seed});
  if (data.has_labels()) {
    result.has_metrics = true;
    result.metrics = evaluate_clustering(result.clustering.labels, data.labels);
  }
  return result;
}

}  // namespace mvc
