// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gcfaggmvc.h"

namespace {

int status_to_exit(mvc_status s) {
  if (s == MVC_OK) return 0;
  if (s == MVC_ERR_NUMERIC || s == MVC_ERR_INTERNAL) return 3;
  return 2;  // argument, config, io, shape
}

int report_failure(mvc_status s) {
  std::fprintf(stderr, "error (%s): %s\n", mvc_status_name(s), mvc_last_error());
  return status_to_exit(s);
}

#define TRY(call)                                   \
  do {                                              \
    const mvc_status s_ = (call);                   \
    if (s_ != MVC_OK) return report_failure(s_);    \
  } while (0)

using ConfigPtr = std::unique_ptr<mvc_config, decltype(&mvc_config_free)>;
using DatasetPtr = std::unique_ptr<mvc_dataset, decltype(&mvc_dataset_free)>;

void print_metrics(const char* tag, const mvc_metrics& m) {
  if (m.valid != 0) {
    std::printf("%s ACC=%.4f NMI=%.4f PUR=%.4f\n", tag, m.acc, m.nmi, m.pur);
  } else {
    std::printf("%s (no ground-truth labels; metrics unavailable)\n", tag);
  }
}

// Option values set on the command line, applied over the config file.
struct KeyValueFlags {
  std::vector<std::pair<std::string, std::string>> values;

  void add(CLI::App* cmd, const std::string& flag, const std::string& key,
           const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values.emplace_back(key, v); }, help);
  }
};

struct TrainArgs {
  std::string config_file;
  KeyValueFlags overrides;
};

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--config", args.config_file, "key = value config file");
  args.overrides.add(cmd, "--dataset", "dataset", "dataset directory (omit to use synthetic_*)");
  args.overrides.add(cmd, "--out", "out", "output directory");
  args.overrides.add(cmd, "--seed", "seed", "training seed");
  args.overrides.add(cmd, "--lambda", "lambda", "contrastive trade-off");
  args.overrides.add(cmd, "--tau", "tau", "contrastive temperature");
  args.overrides.add(cmd, "--batch-size", "batch_size", "mini-batch size");
  args.overrides.add(cmd, "--pretrain-epochs", "pretrain_epochs", "reconstruction epochs");
  args.overrides.add(cmd, "--finetune-epochs", "finetune_epochs", "joint training epochs");
  args.overrides.add(cmd, "--learning-rate", "learning_rate", "Adam learning rate");
  args.overrides.add(cmd, "--ablation", "ablation", "full | no_gcfagg | no_sgcl");
  args.overrides.add(cmd, "--cl-variant", "cl_variant",
                     "sgcl | standard_cl | standard_cl_with_S | sgcl_without_S");
  args.overrides.add(cmd, "--missing-rate", "missing_rate", "incomplete-view rate in [0, 0.7]");
  args.overrides.add(cmd, "--missing-seed", "missing_seed", "mask seed");
  args.overrides.add(cmd, "--eval-every", "eval_every", "epochs between metric evaluations");
  args.overrides.add(cmd, "--normalize", "normalize", "min-max preprocessing (true/false)");
  args.overrides.add(cmd, "--clusters", "clusters", "cluster count override");
  // Escape hatch for any config key, e.g. --set synthetic_n=500.
  cmd->add_option_function<std::string>(
      "--set",
      [&args](const std::string& v) { args.overrides.values.emplace_back("", v); },
      "set any config key as key=value (repeatable)");
}

int build_config(const TrainArgs& args, ConfigPtr& cfg) {
  mvc_config* raw = nullptr;
  if (!args.config_file.empty()) {
    TRY(mvc_config_load(args.config_file.c_str(), &raw));
  } else {
    TRY(mvc_config_create(&raw));
  }
  cfg.reset(raw);
  for (const auto& [key, value] : args.overrides.values) {
    if (key.empty()) {  // --set key=value passthrough
      const auto eq = value.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got \"%s\"\n", value.c_str());
        return 2;
      }
      TRY(mvc_config_set(cfg.get(), value.substr(0, eq).c_str(), value.substr(eq + 1).c_str()));
    } else {
      TRY(mvc_config_set(cfg.get(), key.c_str(), value.c_str()));
    }
  }
  return -1;  // success sentinel
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view clustering via structure-guided feature aggregation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mvc_version()));

  // gen-data ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic multi-view dataset");
  std::uint32_t gen_n = 300, gen_k = 3, gen_views = 3, gen_latent = 10;
  std::vector<std::uint32_t> gen_view_dims;
  double gen_sep = 10.0, gen_noise = 0.1, gen_missing = 0.0;
  std::uint64_t gen_seed = 7, gen_missing_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "samples")->capture_default_str();
  gen->add_option("--k", gen_k, "clusters")->capture_default_str();
  gen->add_option("--views", gen_views, "views")->capture_default_str();
  gen->add_option("--latent-dim", gen_latent, "latent dimension")->capture_default_str();
  gen->add_option("--view-dims", gen_view_dims, "per-view feature widths (default 40 each)")
      ->delimiter(',');
  gen->add_option("--sep", gen_sep, "cluster separation")->capture_default_str();
  gen->add_option("--noise", gen_noise, "view noise sigma")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--missing-rate", gen_missing, "mask this fraction of samples as incomplete")
      ->capture_default_str();
  gen->add_option("--missing-seed", gen_missing_seed, "mask seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset directory")->required();

  // train / ablate ------------------------------------------------------------
  auto* train = app.add_subcommand("train", "pretrain, fine-tune, evaluate and checkpoint");
  TrainArgs train_args;
  add_train_options(train, train_args);
  auto* ablate =
      app.add_subcommand("ablate", "train the full model and both ablation arms, then compare");
  TrainArgs ablate_args;
  add_train_options(ablate, ablate_args);

  // eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  std::string eval_ckpt, eval_data, eval_out;
  std::uint32_t eval_k = 0;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint directory")->required();
  eval->add_option("--dataset", eval_data, "dataset directory")->required();
  eval->add_option("--out", eval_out, "write metrics.csv and predictions here");
  eval->add_option("--k", eval_k, "cluster count override");

  // embed ---------------------------------------------------------------------
  auto* embed = app.add_subcommand("embed", "export Z, H and the consensus representation");
  std::string embed_ckpt, embed_data, embed_out;
  embed->add_option("--checkpoint", embed_ckpt, "checkpoint directory")->required();
  embed->add_option("--dataset", embed_data, "dataset directory")->required();
  embed->add_option("--out", embed_out, "output directory")->required();

  // import-csv ------------------------------------------------------------------
  auto* import = app.add_subcommand("import-csv", "build an MVDS dataset from CSV files");
  std::vector<std::string> import_views;
  std::string import_labels, import_name = "imported", import_out;
  bool import_header = false;
  import->add_option("--view", import_views, "view CSV file (repeat per view)")->required();
  import->add_option("--labels", import_labels, "single-column label CSV");
  import->add_flag("--header", import_header, "skip one header line per file");
  import->add_option("--name", import_name, "dataset name")->capture_default_str();
  import->add_option("--out", import_out, "output dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    mvc_synthetic_spec spec{};
    spec.n_samples = gen_n;
    spec.n_clusters = gen_k;
    spec.n_views = gen_views;
    spec.latent_dim = gen_latent;
    spec.view_dims = gen_view_dims.empty() ? nullptr : gen_view_dims.data();
    spec.cluster_separation = gen_sep;
    spec.noise_sigma = gen_noise;
    spec.seed = gen_seed;
    if (!gen_view_dims.empty() && gen_view_dims.size() != static_cast<std::size_t>(gen_views)) {
      std::fprintf(stderr, "error: %zu view dims for %u views\n", gen_view_dims.size(),
                   gen_views);
      return 2;
    }

    mvc_dataset* raw = nullptr;
    TRY(mvc_dataset_generate(&spec, &raw));
    DatasetPtr ds(raw, &mvc_dataset_free);
    if (gen_missing > 0.0) {
      TRY(mvc_dataset_apply_missing_mask(ds.get(), gen_missing, gen_missing_seed));
    }

    // Stamp the generating configuration into the dataset manifest.
    mvc_config* cfg_raw = nullptr;
    TRY(mvc_config_create(&cfg_raw));
    ConfigPtr cfg(cfg_raw, &mvc_config_free);
    TRY(mvc_config_set(cfg.get(), "synthetic_n", std::to_string(gen_n).c_str()));
    TRY(mvc_config_set(cfg.get(), "synthetic_k", std::to_string(gen_k).c_str()));
    TRY(mvc_config_set(cfg.get(), "synthetic_views", std::to_string(gen_views).c_str()));
    TRY(mvc_config_set(cfg.get(), "synthetic_latent_dim", std::to_string(gen_latent).c_str()));
    if (!gen_view_dims.empty()) {
      std::string dims;
      for (std::uint32_t d : gen_view_dims) dims += std::to_string(d) + " ";
      TRY(mvc_config_set(cfg.get(), "synthetic_view_dims", dims.c_str()));
    }
    TRY(mvc_config_set(cfg.get(), "synthetic_separation", std::to_string(gen_sep).c_str()));
    TRY(mvc_config_set(cfg.get(), "synthetic_noise", std::to_string(gen_noise).c_str()));
    TRY(mvc_config_set(cfg.get(), "synthetic_seed", std::to_string(gen_seed).c_str()));
    TRY(mvc_config_set(cfg.get(), "missing_rate", std::to_string(gen_missing).c_str()));
    TRY(mvc_config_set(cfg.get(), "missing_seed", std::to_string(gen_missing_seed).c_str()));
    char hash[32];
    TRY(mvc_config_hash_hex(cfg.get(), hash, sizeof(hash)));
    TRY(mvc_dataset_set_config_hash(ds.get(), hash));
    TRY(mvc_dataset_save(ds.get(), gen_out.c_str()));

    std::printf("wrote %u samples x %u views (K=%u) to %s\n", mvc_dataset_num_samples(ds.get()),
                mvc_dataset_num_views(ds.get()), mvc_dataset_num_clusters(ds.get()),
                gen_out.c_str());
    mvc_metrics baseline{};
    TRY(mvc_dataset_baseline_kmeans(ds.get(), gen_seed, &baseline));
    print_metrics("raw-feature k-means baseline:", baseline);
    return 0;
  }

  if (train->parsed()) {
    ConfigPtr cfg(nullptr, &mvc_config_free);
    const int rc = build_config(train_args, cfg);
    if (rc >= 0) return rc;
    mvc_metrics final{};
    TRY(mvc_run_train(cfg.get(), &final));
    print_metrics("final:", final);
    return 0;
  }

  if (ablate->parsed()) {
    ConfigPtr cfg(nullptr, &mvc_config_free);
    const int rc = build_config(ablate_args, cfg);
    if (rc >= 0) return rc;
    mvc_metrics rows[3] = {};
    TRY(mvc_run_ablate(cfg.get(), rows));
    const char* names[3] = {"full", "no_gcfagg", "no_sgcl"};
    std::printf("%-10s %8s %8s %8s\n", "ablation", "ACC", "NMI", "PUR");
    for (int i = 0; i < 3; ++i) {
      if (rows[i].valid != 0) {
        std::printf("%-10s %8.4f %8.4f %8.4f\n", names[i], rows[i].acc, rows[i].nmi,
                    rows[i].pur);
      } else {
        std::printf("%-10s %8s %8s %8s\n", names[i], "-", "-", "-");
      }
    }
    return 0;
  }

  if (eval->parsed()) {
    mvc_metrics m{};
    TRY(mvc_run_eval(eval_ckpt.c_str(), eval_data.c_str(),
                     eval_out.empty() ? nullptr : eval_out.c_str(), eval_k, &m));
    print_metrics("eval:", m);
    return 0;
  }

  if (embed->parsed()) {
    TRY(mvc_run_embed(embed_ckpt.c_str(), embed_data.c_str(), embed_out.c_str()));
    std::printf("embeddings written to %s\n", embed_out.c_str());
    return 0;
  }

  if (import->parsed()) {
    std::vector<const char*> paths;
    for (const auto& v : import_views) paths.push_back(v.c_str());
    mvc_dataset* raw = nullptr;
    TRY(mvc_dataset_import_csv(paths.data(), static_cast<std::uint32_t>(paths.size()),
                               import_labels.empty() ? nullptr : import_labels.c_str(),
                               import_header ? 1 : 0, import_name.c_str(), &raw));
    DatasetPtr ds(raw, &mvc_dataset_free);
    TRY(mvc_dataset_save(ds.get(), import_out.c_str()));
    std::printf("imported %u samples x %u views to %s\n", mvc_dataset_num_samples(ds.get()),
                mvc_dataset_num_views(ds.get()), import_out.c_str());
    return 0;
  }

  return 2;
}
