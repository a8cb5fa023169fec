#include "checkpoint.hpp"

#include <sstream>

#include "error.hpp"
#include "keyval.hpp"
#include "mvds.hpp"

namespace fs = std::filesystem;

namespace mvc {

namespace {

std::string param_file_name(const char* prefix, std::size_t index) {
  std::ostringstream ss;
  ss << prefix;
  ss.width(4);
  ss.fill('0');
  ss << index;
  ss << ".mvds";
  return ss.str();
}

}  // namespace

void save_checkpoint(const fs::path& dir, const GcfaggModel& model, const Adam* optimizer,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  fs::create_directories(dir);
  const ModelConfig& cfg = model.config();
  const std::vector<Tensor> params = model.all_parameters();

  std::ostringstream manifest;
  manifest << "# model checkpoint\n";
  manifest << "format = gcfagg-checkpoint-v1\n";
  manifest << "n_views = " << cfg.view_dims.size() << "\n";
  manifest << "view_dims =";
  for (std::size_t d : cfg.view_dims) manifest << " " << d;
  manifest << "\n";
  manifest << "encoder_hidden = " << cfg.widths.encoder_hidden << "\n";
  manifest << "embed_dim = " << cfg.widths.embed_dim << "\n";
  manifest << "projector_hidden = " << cfg.widths.projector_hidden << "\n";
  manifest << "consensus_dim = " << cfg.widths.consensus_dim << "\n";
  manifest << "ffn_dim = " << cfg.ffn_dim << "\n";
  manifest << "fusion_mode = " << (cfg.fusion == FusionMode::kFull ? "full" : "linear") << "\n";
  manifest << "model_seed = " << cfg.seed << "\n";
  manifest << "fusion_ready = " << (model.fusion_ready() ? 1 : 0) << "\n";
  manifest << "n_params = " << params.size() << "\n";
  if (optimizer != nullptr) manifest << "adam_step = " << optimizer->step_count() << "\n";
  for (const auto& [key, value] : extra) manifest << key << " = " << value << "\n";
  write_text_file(dir / "manifest.txt", manifest.str());

  for (std::size_t k = 0; k < params.size(); ++k) {
    write_matrix_file(dir / param_file_name("param_", k), params[k].to_matrix());
  }
  if (optimizer != nullptr) {
    if (optimizer->params().size() != params.size()) {
      throw DomainError("checkpoint: optimizer covers " +
                        std::to_string(optimizer->params().size()) + " of " +
                        std::to_string(params.size()) + " parameters");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
      const std::size_t r = params[k].rows(), c = params[k].cols();
      write_matrix_file(dir / param_file_name("adam_m_", k),
                        DenseMatrix(r, c, optimizer->first_moments()[k]));
      write_matrix_file(dir / param_file_name("adam_v_", k),
                        DenseMatrix(r, c, optimizer->second_moments()[k]));
    }
  }
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) {
    throw IoError(dir.string() + ": not a checkpoint (manifest.txt missing)");
  }
  std::map<std::string, std::string> kv;
  for (const auto& [key, value] : read_keyval_file(manifest_path)) kv[key] = value;

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw ConfigError(manifest_path.string() + ": missing key \"" + key + "\"");
    }
    return it->second;
  };
  if (require("format") != "gcfagg-checkpoint-v1") {
    throw ConfigError(manifest_path.string() + ": unknown format " + kv["format"]);
  }

  ModelConfig cfg;
  for (const auto& tok : split_ws(require("view_dims"))) {
    cfg.view_dims.push_back(static_cast<std::size_t>(parse_int(tok, "view_dims")));
  }
  if (cfg.view_dims.size() != static_cast<std::size_t>(parse_int(require("n_views"), "n_views"))) {
    throw ConfigError(manifest_path.string() + ": n_views disagrees with view_dims");
  }
  cfg.widths.encoder_hidden =
      static_cast<std::size_t>(parse_int(require("encoder_hidden"), "encoder_hidden"));
  cfg.widths.embed_dim = static_cast<std::size_t>(parse_int(require("embed_dim"), "embed_dim"));
  cfg.widths.projector_hidden =
      static_cast<std::size_t>(parse_int(require("projector_hidden"), "projector_hidden"));
  cfg.widths.consensus_dim =
      static_cast<std::size_t>(parse_int(require("consensus_dim"), "consensus_dim"));
  cfg.ffn_dim = static_cast<std::size_t>(parse_int(require("ffn_dim"), "ffn_dim"));
  const std::string mode = require("fusion_mode");
  if (mode == "full") {
    cfg.fusion = FusionMode::kFull;
  } else if (mode == "linear") {
    cfg.fusion = FusionMode::kLinearOnly;
  } else {
    throw ConfigError(manifest_path.string() + ": unknown fusion_mode " + mode);
  }
  cfg.seed = static_cast<std::uint64_t>(parse_int(require("model_seed"), "model_seed"));
  const bool fusion_ready = parse_int(require("fusion_ready"), "fusion_ready") != 0;
  const auto n_params = static_cast<std::size_t>(parse_int(require("n_params"), "n_params"));

  LoadedCheckpoint out{GcfaggModel(cfg), std::move(kv), false, 0, {}, {}};
  if (fusion_ready) out.model.init_fusion(cfg.seed);

  std::vector<Tensor> params = out.model.all_parameters();
  if (params.size() != n_params) {
    throw ConfigError(dir.string() + ": checkpoint stores " + std::to_string(n_params) +
                      " parameters but the architecture has " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    DenseMatrix m = read_matrix_file(dir / param_file_name("param_", k));
    if (m.rows != params[k].rows() || m.cols != params[k].cols()) {
      throw ConfigError(dir.string() + ": parameter " + std::to_string(k) + " is " +
                        shape_str(m.rows, m.cols) + ", expected " +
                        shape_str(params[k].rows(), params[k].cols()));
    }
    params[k].mutable_values() = std::move(m.data);
  }

  if (out.manifest.count("adam_step") != 0) {
    out.has_optimizer = true;
    out.adam_step =
        static_cast<std::size_t>(parse_int(out.manifest.at("adam_step"), "adam_step"));
    for (std::size_t k = 0; k < params.size(); ++k) {
      out.adam_m.push_back(read_matrix_file(dir / param_file_name("adam_m_", k)).data);
      out.adam_v.push_back(read_matrix_file(dir / param_file_name("adam_v_", k)).data);
    }
  }
  return out;
}

}  // namespace mvc
