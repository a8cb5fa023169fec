#include "losses.hpp"

#include <cmath>

#include "error.hpp"

namespace mvc {

ClVariant parse_cl_variant(const std::string& name) {
  if (name == "sgcl") return ClVariant::kSgcl;
  if (name == "standard_cl") return ClVariant::kStandardCl;
  if (name == "standard_cl_with_S" || name == "standard_cl_with_s")
    return ClVariant::kStandardClWithS;
  if (name == "sgcl_without_S" || name == "sgcl_without_s") return ClVariant::kSgclWithoutS;
  throw ConfigError("unknown contrastive variant \"" + name +
                    "\" (expected sgcl, standard_cl, standard_cl_with_S or sgcl_without_S)");
}

std::string cl_variant_name(ClVariant v) {
  switch (v) {
    case ClVariant::kSgcl: return "sgcl";
    case ClVariant::kStandardCl: return "standard_cl";
    case ClVariant::kStandardClWithS: return "standard_cl_with_S";
    case ClVariant::kSgclWithoutS: return "sgcl_without_S";
  }
  return "?";
}

void LossConfig::validate() const {
  if (lambda < 0.0) throw ConfigError("loss: lambda must be >= 0");
  if (tau <= 0.0) throw ConfigError("loss: tau must be > 0");
  if (denom_epsilon <= 0.0) throw ConfigError("loss: denom_epsilon must be > 0");
}

namespace {

// 0/1 column for view v of an n*V mask, as an n x 1 constant.
Tensor mask_column(const std::vector<std::uint8_t>& mask, std::size_t n, std::size_t v_count,
                   std::size_t v) {
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = mask[i * v_count + v] != 0 ? 1.0 : 0.0;
  return Tensor::from_values(n, 1, std::move(col));
}

// Row-normalized copy with clamped norms; counts rows that hit the clamp.
Tensor normalize_rows(const Tensor& t, long* norm_clamps) {
  Tensor norms = row_l2_norm(t);
  if (norm_clamps != nullptr) {
    for (double v : norms.values()) {
      if (v <= 1e-12) ++(*norm_clamps);
    }
  }
  return divide(t, repeat_cols(clamp_min(norms, 1e-12), t.cols()));
}

// Per-row diagonal entries of an n x n tensor as n x 1.
Tensor diagonal_column(const Tensor& m) {
  return row_sum(hadamard(m, Tensor::identity(m.rows())));
}

}  // namespace

Tensor reconstruction_loss(const std::vector<Tensor>& x, const std::vector<Tensor>& x_hat,
                           const std::vector<std::uint8_t>& mask) {
  if (x.size() != x_hat.size()) {
    throw ShapeError("reconstruction_loss: " + std::to_string(x.size()) + " inputs vs " +
                     std::to_string(x_hat.size()) + " reconstructions");
  }
  if (x.empty()) throw ShapeError("reconstruction_loss: no views");
  const std::size_t n = x[0].rows(), v_count = x.size();
  if (!mask.empty() && mask.size() != n * v_count) {
    throw ShapeError("reconstruction_loss: mask has " + std::to_string(mask.size()) +
                     " entries, expected " + std::to_string(n * v_count));
  }
  Tensor acc;
  for (std::size_t v = 0; v < v_count; ++v) {
    if (x[v].rows() != x_hat[v].rows() || x[v].cols() != x_hat[v].cols()) {
      throw ShapeError("reconstruction_loss: view " + std::to_string(v) + " is " +
                       shape_str(x[v].rows(), x[v].cols()) + " but reconstruction is " +
                       shape_str(x_hat[v].rows(), x_hat[v].cols()));
    }
    Tensor sq = square(sub(x[v], x_hat[v]));
    if (!mask.empty()) {
      sq = hadamard(sq, repeat_cols(mask_column(mask, n, v_count, v), x[v].cols()));
    }
    Tensor view_term = sum(sq);
    acc = v == 0 ? view_term : add(acc, view_term);
  }
  return acc;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b,
                         long* zero_norm_count) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: lengths " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na <= 1e-12 || nb <= 1e-12) {
    if (zero_norm_count != nullptr) ++(*zero_norm_count);
  }
  return dot / (std::max(na, 1e-12) * std::max(nb, 1e-12));
}

SgclResult sgcl_loss(const Tensor& h_hat, const std::vector<Tensor>& h_views, const Tensor& s,
                     const LossConfig& cfg, const std::vector<std::uint8_t>& anchor_mask) {
  cfg.validate();
  if (h_views.empty()) throw ShapeError("sgcl_loss: no view projections");
  const std::size_t n = h_hat.rows(), dh = h_hat.cols(), v_count = h_views.size();
  for (std::size_t v = 0; v < v_count; ++v) {
    if (h_views[v].rows() != n || h_views[v].cols() != dh) {
      throw ShapeError("sgcl_loss: view " + std::to_string(v) + " projection is " +
                       shape_str(h_views[v].rows(), h_views[v].cols()) + ", expected " +
                       shape_str(n, dh));
    }
  }
  if (s.rows() != n || s.cols() != n) {
    throw ShapeError("sgcl_loss: S is " + shape_str(s.rows(), s.cols()) + ", expected " +
                     shape_str(n, n));
  }
  if (!anchor_mask.empty() && anchor_mask.size() != n * v_count) {
    throw ShapeError("sgcl_loss: anchor mask has " + std::to_string(anchor_mask.size()) +
                     " entries, expected " + std::to_string(n * v_count));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += s.at(i, j);
    if (std::abs(row - 1.0) > 1e-6) {
      throw DomainError("sgcl_loss: S row " + std::to_string(i) + " sums to " +
                        std::to_string(row) + ", not row-stochastic");
    }
  }

  const bool consensus_anchored =
      cfg.variant == ClVariant::kSgcl || cfg.variant == ClVariant::kSgclWithoutS;
  const bool structure_weighted =
      cfg.variant == ClVariant::kSgcl || cfg.variant == ClVariant::kStandardClWithS;
  if (!consensus_anchored && v_count < 2) {
    throw DomainError("sgcl_loss: " + cl_variant_name(cfg.variant) +
                      " contrasts view pairs and needs at least 2 views");
  }

  SgclResult result;
  const double inv_tau = 1.0 / cfg.tau;
  const Tensor one_minus_s = structure_weighted ? sub(Tensor::constant(n, n, 1.0), s) : Tensor();

  std::vector<Tensor> views_n;
  views_n.reserve(v_count);
  for (const Tensor& hv : h_views) views_n.push_back(normalize_rows(hv, &result.norm_clamps));

  Tensor acc;
  auto add_term = [&](const Tensor& t) { acc = acc.defined() ? add(acc, t) : t; };

  if (consensus_anchored) {
    // As printed: positives e^{C(Hhat_i, H_i^v)/tau}; denominator sums the
    // weighted exponentials over all j (the i = j term included, carrying its
    // (1 - S_ii) weight) minus e^{1/tau}, clamped from below.
    const Tensor hat_n = normalize_rows(h_hat, &result.norm_clamps);
    const Tensor e_self = Tensor::scalar_value(std::exp(inv_tau));
    for (std::size_t v = 0; v < v_count; ++v) {
      Tensor cos = matmul(hat_n, transpose(views_n[v]));  // C(Hhat_i, H_j^v)
      Tensor weighted = structure_weighted ? hadamard(one_minus_s, cos) : cos;
      Tensor raw_denom = sub(row_sum(exp(scalar_mul(weighted, inv_tau))), e_self);
      for (double d : raw_denom.values()) {
        if (d <= cfg.denom_epsilon) ++result.denom_clamps;
      }
      Tensor log_denom = log(clamp_min(raw_denom, cfg.denom_epsilon));
      Tensor per_sample = sub(scalar_mul(diagonal_column(cos), inv_tau), log_denom);
      if (!anchor_mask.empty()) {
        per_sample = hadamard(per_sample, mask_column(anchor_mask, n, v_count, v));
      }
      add_term(sum(per_sample));
    }
    result.value = scalar_mul(acc, -1.0 / (2.0 * static_cast<double>(n)));
    return result;
  }

  // Inter-view anchors: ordered pairs (u, w), positive (H_i^u, H_i^w),
  // denominator over all j of that pair (the positive included, so it is
  // strictly positive and needs no clamp).
  for (std::size_t u = 0; u < v_count; ++u) {
    for (std::size_t w = 0; w < v_count; ++w) {
      if (u == w) continue;
      Tensor cos = matmul(views_n[u], transpose(views_n[w]));  // C(H_i^u, H_j^w)
      Tensor weighted = structure_weighted ? hadamard(one_minus_s, cos) : cos;
      Tensor log_denom = log(row_sum(exp(scalar_mul(weighted, inv_tau))));
      Tensor per_sample = sub(scalar_mul(diagonal_column(cos), inv_tau), log_denom);
      if (!anchor_mask.empty()) {
        // Both sides of the positive pair must be observed.
        per_sample = hadamard(per_sample, hadamard(mask_column(anchor_mask, n, v_count, u),
                                                   mask_column(anchor_mask, n, v_count, w)));
      }
      add_term(sum(per_sample));
    }
  }
  result.value =
      scalar_mul(acc, -1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(v_count - 1)));
  return result;
}

Tensor total_loss(const Tensor& l_r, const Tensor& l_c, const LossConfig& cfg) {
  if (l_r.rows() != 1 || l_r.cols() != 1 || l_c.rows() != 1 || l_c.cols() != 1) {
    throw ShapeError("total_loss: both terms must be 1x1");
  }
  return add(l_r, scalar_mul(l_c, cfg.lambda));
}

}  // namespace mvc
