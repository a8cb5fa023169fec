#include "gcfagg.hpp"

#include <cmath>

#include "error.hpp"
#include "mlp.hpp"

namespace mvc {

Tensor concat_views(const std::vector<Tensor>& z_views) {
  if (z_views.empty()) throw ShapeError("concat_views: no views");
  if (z_views.size() == 1) return z_views[0];
  return concat_cols(z_views);
}

GcfaggModule::GcfaggModule(const GcfaggConfig& cfg, FusionMode mode, Rng& rng)
    : cfg_(cfg), mode_(mode) {
  if (cfg.input_dim == 0) throw DomainError("gcfagg: input_dim must be set");
  if (cfg.output_dim == 0) throw DomainError("gcfagg: output_dim must be set");
  const std::size_t d = cfg.input_dim;
  w_q1_ = xavier_uniform(d, d, rng);
  w_q2_ = xavier_uniform(d, d, rng);
  params_ = {w_q1_, w_q2_};
  if (mode_ == FusionMode::kFull) {
    const std::size_t ff = cfg.resolved_ffn_dim();
    w_r_ = xavier_uniform(d, d, rng);
    ffn_w1_ = xavier_uniform(d, ff, rng);
    ffn_b1_ = Tensor::zeros(1, ff, true);
    ffn_w2_ = xavier_uniform(ff, d, rng);
    ffn_b2_ = Tensor::zeros(1, d, true);
    ffn_w3_ = xavier_uniform(d, cfg.output_dim, rng);
    ffn_b3_ = Tensor::zeros(1, cfg.output_dim, true);
    params_.insert(params_.end(),
                   {w_r_, ffn_w1_, ffn_b1_, ffn_w2_, ffn_b2_, ffn_w3_, ffn_b3_});
  } else {
    lin_w_ = xavier_uniform(d, cfg.output_dim, rng);
    lin_b_ = Tensor::zeros(1, cfg.output_dim, true);
    params_.insert(params_.end(), {lin_w_, lin_b_});
  }
}

StructureResult GcfaggModule::compute_structure(const Tensor& z) const {
  if (z.cols() != cfg_.input_dim) {
    throw ShapeError("gcfagg: Z is " + shape_str(z.rows(), z.cols()) + ", expected " +
                     std::to_string(cfg_.input_dim) + " columns");
  }
  StructureResult out;
  out.q1 = matmul(z, w_q1_);
  out.q2 = matmul(z, w_q2_);
  if (mode_ == FusionMode::kFull) out.r = matmul(z, w_r_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.input_dim));
  out.s = row_softmax(scalar_mul(matmul(out.q1, transpose(out.q2)), scale));
  return out;
}

Tensor GcfaggModule::mix(const Tensor& s, const Tensor& r) const {
  return matmul_mix(s, r);
}

Tensor GcfaggModule::refine(const Tensor& z, const Tensor& z_hat) const {
  if (mode_ != FusionMode::kFull) throw DomainError("gcfagg: refine needs full mode");
  const std::size_t n = z.rows();
  Tensor pre = add(z, z_hat);
  Tensor h = relu(add(matmul(pre, ffn_w1_), repeat_rows(ffn_b1_, n)));
  h = add(matmul(h, ffn_w2_), repeat_rows(ffn_b2_, n));
  return add(matmul(h, ffn_w3_), repeat_rows(ffn_b3_, n));
}

Tensor GcfaggModule::aggregate(const Tensor& s, const Tensor& r, const Tensor& z) const {
  return refine(z, mix(s, r));
}

Tensor GcfaggModule::consensus(const StructureResult& structure, const Tensor& z) const {
  if (mode_ == FusionMode::kFull) return aggregate(structure.s, structure.r, z);
  return add(matmul(z, lin_w_), repeat_rows(lin_b_, z.rows()));
}

}  // namespace mvc
