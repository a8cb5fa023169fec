#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mvc {

enum class ClVariant {
  kSgcl,            // consensus anchors, structure-weighted negatives
  kStandardCl,      // inter-view anchors, unweighted negatives
  kStandardClWithS, // inter-view anchors, structure-weighted negatives
  kSgclWithoutS,    // consensus anchors, unweighted negatives
};

ClVariant parse_cl_variant(const std::string& name);
std::string cl_variant_name(ClVariant v);

struct LossConfig {
  double lambda = 1.0;         // contrastive trade-off in the total loss
  double tau = 0.5;            // temperature
  double denom_epsilon = 1e-8; // lower clamp for the contrastive denominator
  ClVariant variant = ClVariant::kSgcl;

  void validate() const;
};

/// Sum over views of the squared Frobenius distance between inputs and
/// reconstructions. Rows whose view is absent in the mask contribute nothing.
/// mask is n*V row-major (1 = present) or empty for fully observed batches.
Tensor reconstruction_loss(const std::vector<Tensor>& x, const std::vector<Tensor>& x_hat,
                           const std::vector<std::uint8_t>& mask);

/// Plain cosine similarity with both norms clamped below by 1e-12; a clamp
/// bumps *zero_norm_count when provided.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b,
                         long* zero_norm_count = nullptr);

struct SgclResult {
  Tensor value;
  long denom_clamps = 0;  // contrastive denominators that hit the epsilon floor
  long norm_clamps = 0;   // zero rows caught by the cosine norm clamp
};

/// Structure-guided contrastive loss over a batch, or one of its ablation
/// variants. h_hat is n x d_h, each view projection is n x d_h, s is the
/// n x n row-stochastic structure matrix. anchor_mask (n*V row-major, may be
/// empty) drops the per-(sample, view) anchor terms of absent views.
SgclResult sgcl_loss(const Tensor& h_hat, const std::vector<Tensor>& h_views, const Tensor& s,
                     const LossConfig& cfg, const std::vector<std::uint8_t>& anchor_mask = {});

/// L = L_r + lambda * L_c.
Tensor total_loss(const Tensor& l_r, const Tensor& l_c, const LossConfig& cfg);

}  // namespace mvc
