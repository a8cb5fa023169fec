#include "experiment.hpp"

#include <cstdio>
#include <sstream>

#include "checkpoint.hpp"
#include "error.hpp"
#include "keyval.hpp"
#include "mvds.hpp"

namespace fs = std::filesystem;

namespace mvc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_dims(const std::vector<std::size_t>& dims) {
  std::ostringstream ss;
  for (std::size_t i = 0; i < dims.size(); ++i) ss << (i != 0 ? " " : "") << dims[i];
  return ss.str();
}

std::vector<std::size_t> parse_dims(const std::string& value, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_ws(value)) {
    const long long v = parse_int(tok, key);
    if (v < 1) throw ConfigError(key + ": dims must be >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::size_t to_size(const std::string& value, const std::string& key) {
  const long long v = parse_int(value, key);
  if (v < 0) throw ConfigError(key + ": must be >= 0");
  return static_cast<std::size_t>(v);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "dataset") dataset = value;
  else if (key == "synthetic_n") synthetic_n = to_size(value, key);
  else if (key == "synthetic_k") synthetic_k = to_size(value, key);
  else if (key == "synthetic_views") synthetic_views = to_size(value, key);
  else if (key == "synthetic_latent_dim") synthetic_latent_dim = to_size(value, key);
  else if (key == "synthetic_view_dims") synthetic_view_dims = parse_dims(value, key);
  else if (key == "synthetic_separation") synthetic_separation = parse_double(value, key);
  else if (key == "synthetic_noise") synthetic_noise = parse_double(value, key);
  else if (key == "synthetic_seed") synthetic_seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "missing_rate") missing_rate = parse_double(value, key);
  else if (key == "missing_seed") missing_seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "normalize") normalize = parse_bool(value, key);
  else if (key == "clusters") clusters = to_size(value, key);
  else if (key == "encoder_hidden") encoder_hidden = to_size(value, key);
  else if (key == "embed_dim") embed_dim = to_size(value, key);
  else if (key == "projector_hidden") projector_hidden = to_size(value, key);
  else if (key == "consensus_dim") consensus_dim = to_size(value, key);
  else if (key == "ffn_dim") ffn_dim = to_size(value, key);
  else if (key == "pretrain_epochs") pretrain_epochs = to_size(value, key);
  else if (key == "finetune_epochs") finetune_epochs = to_size(value, key);
  else if (key == "batch_size") batch_size = to_size(value, key);
  else if (key == "learning_rate") learning_rate = parse_double(value, key);
  else if (key == "adam_beta1") adam_beta1 = parse_double(value, key);
  else if (key == "adam_beta2") adam_beta2 = parse_double(value, key);
  else if (key == "adam_eps") adam_eps = parse_double(value, key);
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "lambda") lambda = parse_double(value, key);
  else if (key == "tau") tau = parse_double(value, key);
  else if (key == "denom_epsilon") denom_epsilon = parse_double(value, key);
  else if (key == "cl_variant") cl_variant = cl_variant_name(parse_cl_variant(value));
  else if (key == "ablation") ablation = ablation_name(parse_ablation(value));
  else if (key == "eval_every") eval_every = to_size(value, key);
  else if (key == "eval_chunk_cap") eval_chunk_cap = to_size(value, key);
  else if (key == "out") out = value;
  else throw ConfigError("unknown config key \"" + key + "\"");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream ss;
  ss << "dataset = " << dataset << "\n";
  ss << "synthetic_n = " << synthetic_n << "\n";
  ss << "synthetic_k = " << synthetic_k << "\n";
  ss << "synthetic_views = " << synthetic_views << "\n";
  ss << "synthetic_latent_dim = " << synthetic_latent_dim << "\n";
  ss << "synthetic_view_dims = " << fmt_dims(synthetic_view_dims) << "\n";
  ss << "synthetic_separation = " << fmt_double(synthetic_separation) << "\n";
  ss << "synthetic_noise = " << fmt_double(synthetic_noise) << "\n";
  ss << "synthetic_seed = " << synthetic_seed << "\n";
  ss << "missing_rate = " << fmt_double(missing_rate) << "\n";
  ss << "missing_seed = " << missing_seed << "\n";
  ss << "normalize = " << (normalize ? "true" : "false") << "\n";
  ss << "clusters = " << clusters << "\n";
  ss << "encoder_hidden = " << encoder_hidden << "\n";
  ss << "embed_dim = " << embed_dim << "\n";
  ss << "projector_hidden = " << projector_hidden << "\n";
  ss << "consensus_dim = " << consensus_dim << "\n";
  ss << "ffn_dim = " << ffn_dim << "\n";
  ss << "pretrain_epochs = " << pretrain_epochs << "\n";
  ss << "finetune_epochs = " << finetune_epochs << "\n";
  ss << "batch_size = " << batch_size << "\n";
  ss << "learning_rate = " << fmt_double(learning_rate) << "\n";
  ss << "adam_beta1 = " << fmt_double(adam_beta1) << "\n";
  ss << "adam_beta2 = " << fmt_double(adam_beta2) << "\n";
  ss << "adam_eps = " << fmt_double(adam_eps) << "\n";
  ss << "seed = " << seed << "\n";
  ss << "lambda = " << fmt_double(lambda) << "\n";
  ss << "tau = " << fmt_double(tau) << "\n";
  ss << "denom_epsilon = " << fmt_double(denom_epsilon) << "\n";
  ss << "cl_variant = " << cl_variant << "\n";
  ss << "ablation = " << ablation << "\n";
  ss << "eval_every = " << eval_every << "\n";
  ss << "eval_chunk_cap = " << eval_chunk_cap << "\n";
  ss << "out = " << out << "\n";
  return ss.str();
}

std::uint64_t ExperimentConfig::hash64() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash64()));
  return buf;
}

void ExperimentConfig::validate() const {
  train_config().validate();
  if (dataset.empty()) synthetic_spec().validate();
  if (missing_rate < 0.0 || missing_rate > 0.7) {
    throw ConfigError("missing_rate must lie in [0, 0.7]");
  }
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig tc;
  tc.pretrain_epochs = pretrain_epochs;
  tc.finetune_epochs = finetune_epochs;
  tc.batch_size = batch_size;
  tc.learning_rate = learning_rate;
  tc.adam_beta1 = adam_beta1;
  tc.adam_beta2 = adam_beta2;
  tc.adam_eps = adam_eps;
  tc.seed = seed;
  tc.loss.lambda = lambda;
  tc.loss.tau = tau;
  tc.loss.denom_epsilon = denom_epsilon;
  tc.loss.variant = parse_cl_variant(cl_variant);
  tc.ablation = parse_ablation(ablation);
  tc.eval_every = eval_every;
  tc.eval_chunk_cap = eval_chunk_cap;
  return tc;
}

SyntheticSpec ExperimentConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.n_samples = synthetic_n;
  spec.n_clusters = synthetic_k;
  spec.n_views = synthetic_views;
  spec.latent_dim = synthetic_latent_dim;
  spec.view_dims = synthetic_view_dims;
  spec.cluster_separation = synthetic_separation;
  spec.noise_sigma = synthetic_noise;
  spec.seed = synthetic_seed;
  return spec;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : read_keyval_file(path)) cfg.set(key, value);
  return cfg;
}

void ExperimentConfig::save(const fs::path& path) const {
  write_text_file(path, "# experiment config (hash " + hash_hex() + ")\n" + canonical_text());
}

MultiViewDataset prepare_dataset(const ExperimentConfig& cfg) {
  MultiViewDataset ds =
      cfg.dataset.empty() ? generate_synthetic(cfg.synthetic_spec()) : load_dataset(cfg.dataset);
  if (cfg.missing_rate > 0.0) ds = apply_missing_mask(ds, cfg.missing_rate, cfg.missing_seed);
  if (cfg.normalize) ds = normalize_minmax(ds);
  return ds;
}

EvalResult raw_feature_baseline(const MultiViewDataset& ds, std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& v : ds.views) total += v.cols;
  DenseMatrix concat(ds.n_samples(), total);
  std::size_t off = 0;
  for (const auto& v : ds.views) {
    for (std::size_t i = 0; i < v.rows; ++i) {
      std::copy_n(v.row(i), v.cols, concat.row(i) + off);
    }
    off += v.cols;
  }
  if (ds.n_clusters == 0) throw DomainError("baseline: dataset has no cluster count");
  EvalResult result;
  result.clustering = kmeans(concat, {.k = ds.n_clusters, .seed = seed});
  if (ds.has_labels()) {
    result.has_metrics = true;
    result.metrics = evaluate_clustering(result.clustering.labels, ds.labels);
  }
  return result;
}

namespace {

std::string metrics_cell(bool has, double v) {
  return has ? fmt_double(v) : std::string();
}

void write_train_log_csv(const fs::path& path, const TrainLog& log, const std::string& hash) {
  std::ostringstream ss;
  ss << "# config_hash = " << hash << "\n";
  ss << "phase,epoch,recon,contrast,total,clamps,acc,nmi,pur,seconds\n";
  for (const EpochRecord& r : log.records) {
    ss << r.phase << "," << r.epoch << "," << fmt_double(r.mean_recon) << ","
       << fmt_double(r.mean_contrast) << "," << fmt_double(r.mean_total) << "," << r.clamp_count
       << "," << metrics_cell(r.has_metrics, r.metrics.acc) << ","
       << metrics_cell(r.has_metrics, r.metrics.nmi) << ","
       << metrics_cell(r.has_metrics, r.metrics.pur) << ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.seconds);
    ss << buf << "\n";
  }
  write_text_file(path, ss.str());
}

void write_metrics_csv(const fs::path& path, bool has_metrics, const Metrics& m,
                       const std::string& hash) {
  std::ostringstream ss;
  ss << "# config_hash = " << hash << "\n";
  ss << "acc,nmi,pur\n";
  if (has_metrics) {
    ss << fmt_double(m.acc) << "," << fmt_double(m.nmi) << "," << fmt_double(m.pur) << "\n";
  } else {
    ss << ",,\n";
  }
  write_text_file(path, ss.str());
}

std::size_t resolve_cluster_count(const ExperimentConfig& cfg, const MultiViewDataset& ds) {
  if (cfg.clusters > 0) return cfg.clusters;
  if (ds.n_clusters > 0) return ds.n_clusters;
  throw ConfigError("cluster count unknown: dataset has no labels and \"clusters\" is not set");
}

// Rebuild the preprocessing a checkpoint was trained with.
MultiViewDataset dataset_for_checkpoint(const std::map<std::string, std::string>& manifest,
                                        const fs::path& dataset_dir) {
  MultiViewDataset ds = load_dataset(dataset_dir);
  const auto rate_it = manifest.find("missing_rate");
  if (rate_it != manifest.end()) {
    const double rate = parse_double(rate_it->second, "missing_rate");
    if (rate > 0.0 && ds.fully_observed()) {
      ds = apply_missing_mask(ds, rate,
                              static_cast<std::uint64_t>(parse_int(
                                  manifest.at("missing_seed"), "missing_seed")));
    }
  }
  const auto norm_it = manifest.find("normalize");
  if (norm_it != manifest.end() && parse_bool(norm_it->second, "normalize")) {
    ds = normalize_minmax(ds);
  }
  return ds;
}

}  // namespace

TrainOutcome run_train(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.out.empty()) throw ConfigError("run_train: \"out\" directory not set");
  MultiViewDataset ds = prepare_dataset(cfg);
  const std::size_t k = resolve_cluster_count(cfg, ds);

  ModelConfig mc;
  for (const auto& v : ds.views) mc.view_dims.push_back(v.cols);
  mc.widths.encoder_hidden = cfg.encoder_hidden;
  mc.widths.embed_dim = cfg.embed_dim;
  mc.widths.projector_hidden = cfg.projector_hidden;
  mc.widths.consensus_dim = cfg.consensus_dim;
  mc.ffn_dim = cfg.ffn_dim;
  mc.fusion = parse_ablation(cfg.ablation) == Ablation::kNoGcfagg ? FusionMode::kLinearOnly
                                                                  : FusionMode::kFull;
  mc.seed = cfg.seed;
  GcfaggModel model(mc);

  const TrainConfig tc = cfg.train_config();
  TrainOutcome outcome;
  outcome.log = pretrain(model, ds, tc);
  Adam optimizer;
  TrainLog fine = finetune(model, ds, tc, &optimizer);
  outcome.log.records.insert(outcome.log.records.end(), fine.records.begin(),
                             fine.records.end());

  // Final readout with the training seed so an immediate eval reproduces it.
  EvalResult eval = evaluate_model(model, ds, k, cfg.seed, cfg.eval_chunk_cap);
  outcome.has_metrics = eval.has_metrics;
  outcome.metrics = eval.metrics;

  const fs::path out_dir(cfg.out);
  fs::create_directories(out_dir);
  const std::string hash = cfg.hash_hex();
  outcome.checkpoint_dir = out_dir / "checkpoint";
  std::vector<std::pair<std::string, std::string>> extra{
      {"config_hash", hash},
      {"kmeans_seed", std::to_string(cfg.seed)},
      {"n_clusters", std::to_string(k)},
      {"normalize", cfg.normalize ? "true" : "false"},
      {"missing_rate", fmt_double(cfg.missing_rate)},
      {"missing_seed", std::to_string(cfg.missing_seed)},
      {"dataset_name", ds.name},
      {"ablation", cfg.ablation},
      {"cl_variant", cfg.cl_variant},
  };
  save_checkpoint(outcome.checkpoint_dir, model, &optimizer, extra);
  outcome.log_csv = out_dir / "train_log.csv";
  write_train_log_csv(outcome.log_csv, outcome.log, hash);
  outcome.metrics_csv = out_dir / "metrics.csv";
  write_metrics_csv(outcome.metrics_csv, outcome.has_metrics, outcome.metrics, hash);
  cfg.save(out_dir / "config.txt");
  return outcome;
}

EvalOutcome run_eval(const fs::path& checkpoint_dir, const fs::path& dataset_dir,
                     const fs::path& out_dir, std::size_t k_override) {
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint_dir);
  MultiViewDataset ds = dataset_for_checkpoint(ckpt.manifest, dataset_dir);

  std::size_t k = k_override;
  if (k == 0 && ckpt.manifest.count("n_clusters") != 0) {
    k = static_cast<std::size_t>(parse_int(ckpt.manifest.at("n_clusters"), "n_clusters"));
  }
  if (k == 0) k = ds.n_clusters;
  if (k == 0) throw ConfigError("run_eval: cluster count unknown");
  std::uint64_t kmeans_seed = 0;
  if (ckpt.manifest.count("kmeans_seed") != 0) {
    kmeans_seed = static_cast<std::uint64_t>(
        parse_int(ckpt.manifest.at("kmeans_seed"), "kmeans_seed"));
  }

  EvalResult eval = evaluate_model(ckpt.model, ds, k,
                                   kmeans_seed, ckpt.manifest.count("eval_chunk_cap") != 0
                                       ? to_size(ckpt.manifest.at("eval_chunk_cap"), "cap")
                                       : 20000);
  EvalOutcome outcome;
  outcome.has_metrics = eval.has_metrics;
  outcome.metrics = eval.metrics;
  outcome.predictions = eval.clustering.labels;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string hash = ckpt.manifest.count("config_hash") != 0
                                 ? ckpt.manifest.at("config_hash")
                                 : std::string("none");
    write_metrics_csv(out_dir / "metrics.csv", outcome.has_metrics, outcome.metrics, hash);
    write_labels_file(out_dir / "predictions.bin", outcome.predictions);
  }
  return outcome;
}

void run_embed(const fs::path& checkpoint_dir, const fs::path& dataset_dir,
               const fs::path& out_dir) {
  LoadedCheckpoint ckpt = load_checkpoint(checkpoint_dir);
  MultiViewDataset ds = dataset_for_checkpoint(ckpt.manifest, dataset_dir);
  EmbeddingResult emb = compute_embeddings(ckpt.model, ds, 20000);

  fs::create_directories(out_dir);
  write_matrix_file(out_dir / "embed_Z.mvds", emb.z);
  write_matrix_file(out_dir / "embed_H.mvds", emb.h_concat);
  write_matrix_file(out_dir / "embed_Hhat.mvds", emb.h_hat);
  if (ds.has_labels()) write_labels_file(out_dir / "labels.bin", ds.labels);

  std::ostringstream manifest;
  manifest << "# exported embeddings\n";
  manifest << "config_hash = "
           << (ckpt.manifest.count("config_hash") != 0 ? ckpt.manifest.at("config_hash") : "none")
           << "\n";
  manifest << "n_samples = " << ds.n_samples() << "\n";
  manifest << "z_dim = " << emb.z.cols << "\n";
  manifest << "h_concat_dim = " << emb.h_concat.cols << "\n";
  manifest << "consensus_dim = " << emb.h_hat.cols << "\n";
  manifest << "has_labels = " << (ds.has_labels() ? 1 : 0) << "\n";
  write_text_file(out_dir / "manifest.txt", manifest.str());
}

std::vector<AblateRow> run_ablate(const ExperimentConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("run_ablate: \"out\" directory not set");
  std::vector<AblateRow> rows;
  for (const char* arm : {"full", "no_gcfagg", "no_sgcl"}) {
    ExperimentConfig sub = cfg;
    sub.ablation = arm;
    sub.out = (fs::path(cfg.out) / arm).string();
    TrainOutcome outcome = run_train(sub);
    rows.push_back(AblateRow{arm, outcome.has_metrics, outcome.metrics});
  }
  std::ostringstream ss;
  ss << "# config_hash = " << cfg.hash_hex() << "\n";
  ss << "ablation,acc,nmi,pur\n";
  for (const AblateRow& row : rows) {
    ss << row.ablation << "," << metrics_cell(row.has_metrics, row.metrics.acc) << ","
       << metrics_cell(row.has_metrics, row.metrics.nmi) << ","
       << metrics_cell(row.has_metrics, row.metrics.pur) << "\n";
  }
  write_text_file(fs::path(cfg.out) / "ablate_summary.csv", ss.str());
  return rows;
}

}  // namespace mvc
