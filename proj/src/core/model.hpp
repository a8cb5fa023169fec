#pragma once

#include <cstdint>
#include <vector>

#include "gcfagg.hpp"
#include "mlp.hpp"
#include "tensor.hpp"

namespace mvc {

struct ModelConfig {
  std::vector<std::size_t> view_dims;  // D_v per view
  NetworkWidths widths;
  std::size_t ffn_dim = 0;  // 0 means 2 * concat dim
  FusionMode fusion = FusionMode::kFull;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One mini-batch's intermediate quantities, kept around for losses and
/// diagnostics.
struct BatchForward {
  std::vector<Tensor> z_views;  // encoder outputs, n x d_v each
  Tensor z;                     // concatenation, n x d
  Tensor q1, q2, r;             // feature-space projections, n x d
  Tensor s;                     // structure matrix, n x n
  Tensor z_hat;                 // structure-mixed representation (full mode)
  Tensor h_hat;                 // consensus representation, n x d_h
  std::vector<Tensor> h_views;  // contrastive projections, n x d_h each
  std::vector<Tensor> x_hat;    // reconstructions, n x D_v each
};

/// Per-view autoencoders plus the aggregation module and projection heads.
/// Construction initializes only the autoencoders; the fusion stage (GCFAgg
/// weights and projectors) is freshly initialized by init_fusion at
/// fine-tune start.
class GcfaggModel {
 public:
  explicit GcfaggModel(ModelConfig cfg);

  void init_fusion(std::uint64_t seed);
  bool fusion_ready() const { return fusion_ready_; }

  /// Autoencoder-only pass: fills z_views and x_hat.
  BatchForward forward_autoencoders(const std::vector<Tensor>& x_views) const;
  /// Full pass through encoders, aggregation, projectors and decoders.
  BatchForward forward(const std::vector<Tensor>& x_views) const;

  std::vector<Tensor> autoencoder_parameters() const;
  std::vector<Tensor> fusion_parameters() const;  // projectors + aggregation
  std::vector<Tensor> all_parameters() const;

  const ModelConfig& config() const { return cfg_; }
  std::size_t n_views() const { return cfg_.view_dims.size(); }
  std::size_t concat_dim() const { return n_views() * cfg_.widths.embed_dim; }
  std::vector<ViewNetworks>& view_nets() { return views_; }
  const std::vector<ViewNetworks>& view_nets() const { return views_; }
  GcfaggModule& fusion() { return fusion_; }
  const GcfaggModule& fusion() const { return fusion_; }

 private:
  ModelConfig cfg_;
  std::vector<ViewNetworks> views_;
  GcfaggModule fusion_;
  bool fusion_ready_ = false;
};

}  // namespace mvc
