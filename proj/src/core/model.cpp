#include "model.hpp"

#include "error.hpp"

namespace mvc {

void ModelConfig::validate() const {
  if (view_dims.empty()) throw DomainError("model: no view dims");
  for (std::size_t d : view_dims) {
    if (d < 1) throw DomainError("model: zero-width view");
  }
  if (widths.embed_dim < 1 || widths.consensus_dim < 1 || widths.encoder_hidden < 1 ||
      widths.projector_hidden < 1) {
    throw DomainError("model: all widths must be >= 1");
  }
}

GcfaggModel::GcfaggModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  views_.resize(cfg_.view_dims.size());
  for (std::size_t v = 0; v < views_.size(); ++v) {
    views_[v].encoder =
        Mlp({{cfg_.view_dims[v], cfg_.widths.encoder_hidden, cfg_.widths.embed_dim}}, rng);
    views_[v].decoder =
        Mlp({{cfg_.widths.embed_dim, cfg_.widths.encoder_hidden, cfg_.view_dims[v]}}, rng);
  }
}

void GcfaggModel::init_fusion(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& view : views_) {
    view.projector = Mlp(
        {{cfg_.widths.embed_dim, cfg_.widths.projector_hidden, cfg_.widths.consensus_dim}}, rng);
  }
  GcfaggConfig gcfg;
  gcfg.input_dim = concat_dim();
  gcfg.ffn_dim = cfg_.ffn_dim;
  gcfg.output_dim = cfg_.widths.consensus_dim;
  fusion_ = GcfaggModule(gcfg, cfg_.fusion, rng);
  fusion_ready_ = true;
}

BatchForward GcfaggModel::forward_autoencoders(const std::vector<Tensor>& x_views) const {
  if (x_views.size() != n_views()) {
    throw ShapeError("model: " + std::to_string(x_views.size()) + " input views, expected " +
                     std::to_string(n_views()));
  }
  BatchForward out;
  out.z_views.reserve(n_views());
  out.x_hat.reserve(n_views());
  for (std::size_t v = 0; v < n_views(); ++v) {
    Tensor z = views_[v].encoder.forward(x_views[v]);
    out.x_hat.push_back(views_[v].decoder.forward(z));
    out.z_views.push_back(std::move(z));
  }
  return out;
}

BatchForward GcfaggModel::forward(const std::vector<Tensor>& x_views) const {
  if (!fusion_ready_) throw DomainError("model: fusion stage not initialized");
  BatchForward out = forward_autoencoders(x_views);
  out.z = concat_views(out.z_views);
  StructureResult structure = fusion_.compute_structure(out.z);
  out.s = structure.s;
  out.q1 = structure.q1;
  out.q2 = structure.q2;
  out.r = structure.r;
  if (fusion_.mode() == FusionMode::kFull) {
    out.z_hat = fusion_.mix(out.s, out.r);
    out.h_hat = fusion_.refine(out.z, out.z_hat);
  } else {
    out.h_hat = fusion_.consensus(structure, out.z);
  }
  out.h_views.reserve(n_views());
  for (std::size_t v = 0; v < n_views(); ++v) {
    out.h_views.push_back(views_[v].projector.forward(out.z_views[v]));
  }
  return out;
}

std::vector<Tensor> GcfaggModel::autoencoder_parameters() const {
  std::vector<Tensor> out;
  for (const auto& view : views_) {
    out.insert(out.end(), view.encoder.parameters().begin(), view.encoder.parameters().end());
    out.insert(out.end(), view.decoder.parameters().begin(), view.decoder.parameters().end());
  }
  return out;
}

std::vector<Tensor> GcfaggModel::fusion_parameters() const {
  if (!fusion_ready_) return {};
  std::vector<Tensor> out;
  for (const auto& view : views_) {
    out.insert(out.end(), view.projector.parameters().begin(),
               view.projector.parameters().end());
  }
  out.insert(out.end(), fusion_.parameters().begin(), fusion_.parameters().end());
  return out;
}

std::vector<Tensor> GcfaggModel::all_parameters() const {
  std::vector<Tensor> out = autoencoder_parameters();
  const std::vector<Tensor> fusion = fusion_parameters();
  out.insert(out.end(), fusion.begin(), fusion.end());
  return out;
}

}  // namespace mvc
