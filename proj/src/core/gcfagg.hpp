#pragma once

#include <cstddef>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace mvc {

/// Concatenate the view-specific representations along columns, in view
/// order: Z = [Z^1, Z^2, ..., Z^V].
Tensor concat_views(const std::vector<Tensor>& z_views);

struct GcfaggConfig {
  std::size_t input_dim = 0;    // d, the concatenated width
  std::size_t ffn_dim = 0;      // 0 means 2 * input_dim
  std::size_t output_dim = 128; // consensus width d_h

  std::size_t resolved_ffn_dim() const { return ffn_dim == 0 ? 2 * input_dim : ffn_dim; }
};

enum class FusionMode {
  kFull,        // structure-mixed aggregation with FFN refinement
  kLinearOnly,  // consensus is a plain linear map of Z; S is still produced
};

struct StructureResult {
  Tensor s;   // n x n row-stochastic
  Tensor q1;  // n x d
  Tensor q2;  // n x d
  Tensor r;   // n x d
};

/// Global and cross-view feature aggregation: learned projections of the
/// concatenated representation, a row-softmax structure matrix over the
/// batch, structure-weighted mixing and a residual feed-forward refinement
/// into the consensus space.
class GcfaggModule {
 public:
  GcfaggModule() = default;
  GcfaggModule(const GcfaggConfig& cfg, FusionMode mode, Rng& rng);

  /// Q1 = Z Wq1, Q2 = Z Wq2, R = Z Wr, S = row_softmax(Q1 Q2^T / sqrt(d)).
  StructureResult compute_structure(const Tensor& z) const;

  /// Zhat = S R: every sample representation becomes the S-weighted mix of
  /// the batch. Runs along the sample axis, so sums are order-canonical.
  Tensor mix(const Tensor& s, const Tensor& r) const;

  /// Hhat = (relu((Z + Zhat) W1 + b1) W2 + b2) W3 + b3.
  Tensor refine(const Tensor& z, const Tensor& z_hat) const;

  /// refine(z, mix(s, r)).
  Tensor aggregate(const Tensor& s, const Tensor& r, const Tensor& z) const;

  /// Consensus representation for the configured mode.
  Tensor consensus(const StructureResult& structure, const Tensor& z) const;

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  FusionMode mode() const { return mode_; }
  const GcfaggConfig& config() const { return cfg_; }

  const Tensor& w_q1() const { return w_q1_; }
  const Tensor& w_q2() const { return w_q2_; }
  const Tensor& w_r() const { return w_r_; }
  const Tensor& ffn_w1() const { return ffn_w1_; }
  const Tensor& ffn_b1() const { return ffn_b1_; }
  const Tensor& ffn_w2() const { return ffn_w2_; }
  const Tensor& ffn_b2() const { return ffn_b2_; }
  const Tensor& ffn_w3() const { return ffn_w3_; }
  const Tensor& ffn_b3() const { return ffn_b3_; }

 private:
  GcfaggConfig cfg_;
  FusionMode mode_ = FusionMode::kFull;
  Tensor w_q1_, w_q2_, w_r_;
  Tensor ffn_w1_, ffn_b1_, ffn_w2_, ffn_b2_, ffn_w3_, ffn_b3_;
  Tensor lin_w_, lin_b_;  // kLinearOnly consensus map
  std::vector<Tensor> params_;
};

}  // namespace mvc
