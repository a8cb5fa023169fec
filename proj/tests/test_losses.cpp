#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/grad_check.hpp"
#include "core/losses.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace mvc;

namespace {

// Term-by-term scalar evaluation of the contrastive loss, sharing no code
// with the tensor path.
double sgcl_oracle(const DenseMatrix& h_hat, const std::vector<DenseMatrix>& h_views,
                   const DenseMatrix& s, const LossConfig& cfg,
                   const std::vector<std::uint8_t>& mask = {}) {
  const std::size_t n = h_hat.rows, dh = h_hat.cols, v_count = h_views.size();
  const bool consensus = cfg.variant == ClVariant::kSgcl || cfg.variant == ClVariant::kSgclWithoutS;
  const bool weighted =
      cfg.variant == ClVariant::kSgcl || cfg.variant == ClVariant::kStandardClWithS;
  auto present = [&](std::size_t i, std::size_t v) {
    return mask.empty() || mask[i * v_count + v] != 0;
  };

  double total = 0.0;
  if (consensus) {
    for (std::size_t v = 0; v < v_count; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!present(i, v)) continue;
        const double pos = oracle::cosine(h_hat.row(i), h_views[v].row(i), dh);
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double c = oracle::cosine(h_hat.row(i), h_views[v].row(j), dh);
          const double w = weighted ? 1.0 - s.at(i, j) : 1.0;
          denom += std::exp(w * c / cfg.tau);
        }
        denom -= std::exp(1.0 / cfg.tau);
        if (denom < cfg.denom_epsilon) denom = cfg.denom_epsilon;
        total += std::log(std::exp(pos / cfg.tau) / denom);
      }
    }
    return -total / (2.0 * static_cast<double>(n));
  }
  for (std::size_t u = 0; u < v_count; ++u) {
    for (std::size_t w = 0; w < v_count; ++w) {
      if (u == w) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (!present(i, u) || !present(i, w)) continue;
        const double pos = oracle::cosine(h_views[u].row(i), h_views[w].row(i), dh);
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double c = oracle::cosine(h_views[u].row(i), h_views[w].row(j), dh);
          const double weight = weighted ? 1.0 - s.at(i, j) : 1.0;
          denom += std::exp(weight * c / cfg.tau);
        }
        total += std::log(std::exp(pos / cfg.tau) / denom);
      }
    }
  }
  return -total / (2.0 * static_cast<double>(n) * static_cast<double>(v_count - 1));
}

double recon_oracle(const std::vector<DenseMatrix>& x, const std::vector<DenseMatrix>& x_hat,
                    const std::vector<std::uint8_t>& mask = {}) {
  double total = 0.0;
  const std::size_t v_count = x.size();
  for (std::size_t v = 0; v < v_count; ++v) {
    for (std::size_t i = 0; i < x[v].rows; ++i) {
      if (!mask.empty() && mask[i * v_count + v] == 0) continue;
      for (std::size_t j = 0; j < x[v].cols; ++j) {
        const double d = x[v].at(i, j) - x_hat[v].at(i, j);
        total += d * d;
      }
    }
  }
  return total;
}

// Row-stochastic matrix from random logits.
DenseMatrix random_structure(Rng& rng, std::size_t n) {
  return oracle::softmax_rows(oracle::random_matrix(rng, n, n));
}

}  // namespace

TEST_CASE("loss config defaults and validation") {
  LossConfig cfg;
  CHECK(cfg.lambda == 1.0);
  CHECK(cfg.tau == 0.5);
  CHECK(cfg.denom_epsilon == 1e-8);
  CHECK(cfg.variant == ClVariant::kSgcl);

  cfg.tau = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(parse_cl_variant("bogus"), ConfigError);
  CHECK(parse_cl_variant("standard_cl_with_S") == ClVariant::kStandardClWithS);
}

TEST_CASE("perfect reconstruction has zero loss") {
  Rng rng(1);
  Tensor x = Tensor::from_matrix(oracle::random_matrix(rng, 4, 3));
  CHECK(reconstruction_loss({x}, {x}, {}).item() == 0.0);
}

TEST_CASE("simple analytic reconstruction case") {
  Tensor x = Tensor::from_values(1, 2, {1.0, 0.0});
  Tensor xh = Tensor::from_values(1, 2, {0.0, 0.0});
  CHECK(reconstruction_loss({x}, {xh}, {}).item() == 1.0);
}

TEST_CASE("reconstruction loss matches the loop oracle over views and masks") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<DenseMatrix> x, xh;
    for (int v = 0; v < 3; ++v) {
      x.push_back(oracle::random_matrix(rng, 6, 4));
      xh.push_back(oracle::random_matrix(rng, 6, 4));
    }
    std::vector<Tensor> xt, xht;
    for (int v = 0; v < 3; ++v) {
      xt.push_back(Tensor::from_matrix(x[v]));
      xht.push_back(Tensor::from_matrix(xh[v]));
    }
    CHECK(reconstruction_loss(xt, xht, {}).item() ==
          doctest::Approx(recon_oracle(x, xh)).epsilon(1e-12));

    std::vector<std::uint8_t> mask(6 * 3, 1);
    mask[0 * 3 + 1] = 0;
    mask[3 * 3 + 0] = 0;
    mask[5 * 3 + 2] = 0;
    CHECK(reconstruction_loss(xt, xht, mask).item() ==
          doctest::Approx(recon_oracle(x, xh, mask)).epsilon(1e-12));
  }
}

TEST_CASE("reconstruction loss rejects mismatched shapes") {
  Tensor a = Tensor::zeros(2, 3), b = Tensor::zeros(2, 4);
  CHECK_THROWS_AS(reconstruction_loss({a}, {b}, {}), ShapeError);
}

TEST_CASE("cosine similarity analytic cases") {
  CHECK(cosine_similarity({3.0, 4.0}, {3.0, 4.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity({1.0, -2.0}, {-1.0, 2.0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == 0.0);

  long clamps = 0;
  const double v = cosine_similarity({0.0, 0.0}, {1.0, 0.0}, &clamps);
  CHECK(v == 0.0);
  CHECK(clamps == 1);
}

TEST_CASE("degenerate single-sample batch engages the denominator clamp") {
  // n = 1, V = 1, tau = 0.5: the raw denominator is e^0 - e^2 < 0, so the
  // clamp must fire and the loss becomes -(1/2) * (2C - log(eps)).
  LossConfig cfg;
  Tensor h_hat = Tensor::from_values(1, 2, {1.0, 2.0});
  Tensor h_view = Tensor::from_values(1, 2, {2.0, 1.0});
  Tensor s = Tensor::from_values(1, 1, {1.0});

  SgclResult result = sgcl_loss(h_hat, {h_view}, s, cfg);
  CHECK(result.denom_clamps == 1);

  const double c = oracle::cosine(h_hat.values().data(), h_view.values().data(), 2);
  const double expected = -0.5 * (2.0 * c - std::log(1e-8));
  CHECK(result.value.item() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("raising the similarity of a structure-zero negative raises the loss") {
  // S = I means S_ij = 0 off the diagonal: negatives are maximally repelled,
  // so moving a negative closer to the anchor must increase the loss.
  LossConfig cfg;
  Tensor s = Tensor::from_matrix(DenseMatrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  Tensor h_hat = Tensor::from_values(2, 2, {1.0, 0.0, 0.0, 1.0});

  Tensor far = Tensor::from_values(2, 2, {1.0, 0.0, -1.0, 0.2});
  Tensor near = Tensor::from_values(2, 2, {1.0, 0.0, 0.9, 0.2});
  const double loss_far = sgcl_loss(h_hat, {far}, s, cfg).value.item();
  const double loss_near = sgcl_loss(h_hat, {near}, s, cfg).value.item();
  CHECK(loss_near > loss_far);
}

TEST_CASE("sgcl matches the term-by-term oracle for every variant") {
  Rng rng(3);
  for (ClVariant variant : {ClVariant::kSgcl, ClVariant::kStandardCl,
                            ClVariant::kStandardClWithS, ClVariant::kSgclWithoutS}) {
    for (int trial = 0; trial < 5; ++trial) {
      LossConfig cfg;
      cfg.variant = variant;
      DenseMatrix h_hat = oracle::random_matrix(rng, 4, 3);
      std::vector<DenseMatrix> views{oracle::random_matrix(rng, 4, 3),
                                     oracle::random_matrix(rng, 4, 3)};
      DenseMatrix s = random_structure(rng, 4);

      SgclResult result = sgcl_loss(Tensor::from_matrix(h_hat),
                                    {Tensor::from_matrix(views[0]), Tensor::from_matrix(views[1])},
                                    Tensor::from_matrix(s), cfg);
      const double expect = sgcl_oracle(h_hat, views, s, cfg);
      CHECK_MESSAGE(result.value.item() == doctest::Approx(expect).epsilon(1e-10),
                    cl_variant_name(variant));
    }
  }
}

TEST_CASE("masked anchors drop out of the loss") {
  Rng rng(4);
  LossConfig cfg;
  DenseMatrix h_hat = oracle::random_matrix(rng, 5, 3);
  std::vector<DenseMatrix> views{oracle::random_matrix(rng, 5, 3),
                                 oracle::random_matrix(rng, 5, 3)};
  DenseMatrix s = random_structure(rng, 5);
  std::vector<std::uint8_t> mask(5 * 2, 1);
  mask[1 * 2 + 0] = 0;
  mask[4 * 2 + 1] = 0;

  for (ClVariant variant : {ClVariant::kSgcl, ClVariant::kStandardCl}) {
    cfg.variant = variant;
    SgclResult result = sgcl_loss(Tensor::from_matrix(h_hat),
                                  {Tensor::from_matrix(views[0]), Tensor::from_matrix(views[1])},
                                  Tensor::from_matrix(s), cfg, mask);
    CHECK(result.value.item() ==
          doctest::Approx(sgcl_oracle(h_hat, views, s, cfg, mask)).epsilon(1e-10));
  }
}

TEST_CASE("uniform structure relates sgcl and its unweighted variant") {
  Rng rng(5);
  const std::size_t n = 6;
  DenseMatrix h_hat = oracle::random_matrix(rng, n, 4);
  std::vector<DenseMatrix> views{oracle::random_matrix(rng, n, 4)};
  DenseMatrix s(n, n, 1.0 / static_cast<double>(n));

  LossConfig weighted;  // exponent weights 1 - 1/n
  LossConfig unweighted;
  unweighted.variant = ClVariant::kSgclWithoutS;
  const double w = sgcl_loss(Tensor::from_matrix(h_hat), {Tensor::from_matrix(views[0])},
                             Tensor::from_matrix(s), weighted)
                       .value.item();
  const double u = sgcl_loss(Tensor::from_matrix(h_hat), {Tensor::from_matrix(views[0])},
                             Tensor::from_matrix(s), unweighted)
                       .value.item();
  CHECK(w == doctest::Approx(sgcl_oracle(h_hat, views, s, weighted)).epsilon(1e-10));
  CHECK(u == doctest::Approx(sgcl_oracle(h_hat, views, s, unweighted)).epsilon(1e-10));
  CHECK(w != u);  // the weight change is the only difference
}

TEST_CASE("sgcl is exactly invariant to a simultaneous row permutation") {
  Rng rng(6);
  const std::size_t n = 5, dh = 3;
  DenseMatrix h_hat = oracle::random_matrix(rng, n, dh);
  std::vector<DenseMatrix> views{oracle::random_matrix(rng, n, dh),
                                 oracle::random_matrix(rng, n, dh)};
  DenseMatrix s = random_structure(rng, n);
  const std::vector<std::size_t> perm{3, 0, 4, 2, 1};

  DenseMatrix h_hat_p(n, dh), s_p(n, n);
  std::vector<DenseMatrix> views_p{DenseMatrix(n, dh), DenseMatrix(n, dh)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dh; ++j) {
      h_hat_p.at(i, j) = h_hat.at(perm[i], j);
      views_p[0].at(i, j) = views[0].at(perm[i], j);
      views_p[1].at(i, j) = views[1].at(perm[i], j);
    }
    for (std::size_t j = 0; j < n; ++j) s_p.at(i, j) = s.at(perm[i], perm[j]);
  }

  for (ClVariant variant : {ClVariant::kSgcl, ClVariant::kStandardCl,
                            ClVariant::kStandardClWithS, ClVariant::kSgclWithoutS}) {
    LossConfig cfg;
    cfg.variant = variant;
    const double base =
        sgcl_loss(Tensor::from_matrix(h_hat),
                  {Tensor::from_matrix(views[0]), Tensor::from_matrix(views[1])},
                  Tensor::from_matrix(s), cfg)
            .value.item();
    const double permuted =
        sgcl_loss(Tensor::from_matrix(h_hat_p),
                  {Tensor::from_matrix(views_p[0]), Tensor::from_matrix(views_p[1])},
                  Tensor::from_matrix(s_p), cfg)
            .value.item();
    CHECK_MESSAGE(permuted == base, cl_variant_name(variant));  // bit-exact
  }
}

TEST_CASE("positive per-row rescaling leaves the loss unchanged") {
  Rng rng(7);
  const std::size_t n = 5, dh = 4;
  DenseMatrix h_hat = oracle::random_matrix(rng, n, dh);
  std::vector<DenseMatrix> views{oracle::random_matrix(rng, n, dh)};
  DenseMatrix s = random_structure(rng, n);

  DenseMatrix h_hat_s = h_hat;
  DenseMatrix view_s = views[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.1 + 5.0 * rng.uniform();
    const double b = 0.1 + 5.0 * rng.uniform();
    for (std::size_t j = 0; j < dh; ++j) {
      h_hat_s.at(i, j) *= a;
      view_s.at(i, j) *= b;
    }
  }
  LossConfig cfg;
  const double base = sgcl_loss(Tensor::from_matrix(h_hat), {Tensor::from_matrix(views[0])},
                                Tensor::from_matrix(s), cfg)
                          .value.item();
  const double scaled = sgcl_loss(Tensor::from_matrix(h_hat_s), {Tensor::from_matrix(view_s)},
                                  Tensor::from_matrix(s), cfg)
                            .value.item();
  CHECK(scaled == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("sgcl rejects a non-row-stochastic S") {
  Rng rng(8);
  Tensor h_hat = Tensor::from_matrix(oracle::random_matrix(rng, 3, 2));
  Tensor view = Tensor::from_matrix(oracle::random_matrix(rng, 3, 2));
  Tensor bad_s = Tensor::constant(3, 3, 0.5);
  CHECK_THROWS_AS(sgcl_loss(h_hat, {view}, bad_s, LossConfig{}), DomainError);
}

TEST_CASE("total loss combines the two parts") {
  LossConfig cfg;
  Tensor lr = Tensor::scalar_value(2.0);
  Tensor lc = Tensor::scalar_value(3.0);
  CHECK(total_loss(lr, lc, cfg).item() == 5.0);

  cfg.lambda = 0.0;  // the no-contrastive ablation
  CHECK(total_loss(lr, lc, cfg).item() == 2.0);

  cfg.lambda = 0.25;
  CHECK(total_loss(lr, lc, cfg).item() == doctest::Approx(2.75).epsilon(1e-15));
}

namespace {

// Smallest distance of any raw contrastive denominator from the clamp floor.
// Finite differences are only meaningful when no perturbation can cross the
// clamp boundary; denominators deep on either side are fine.
double denominator_margin(const DenseMatrix& h_hat, const std::vector<DenseMatrix>& views,
                          const DenseMatrix& s, const LossConfig& cfg) {
  double margin = std::numeric_limits<double>::infinity();
  const std::size_t n = h_hat.rows, dh = h_hat.cols;
  for (const DenseMatrix& view : views) {
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double c = oracle::cosine(h_hat.row(i), view.row(j), dh);
        denom += std::exp((1.0 - s.at(i, j)) * c / cfg.tau);
      }
      denom -= std::exp(1.0 / cfg.tau);
      margin = std::min(margin, std::abs(denom - cfg.denom_epsilon));
    }
  }
  return margin;
}

}  // namespace

TEST_CASE("gradients of every variant pass finite differences") {
  Rng rng(90);
  const std::size_t n = 4, dh = 3;
  DenseMatrix s_fixed = random_structure(rng, n);

  for (ClVariant variant : {ClVariant::kSgcl, ClVariant::kStandardCl,
                            ClVariant::kStandardClWithS, ClVariant::kSgclWithoutS}) {
    LossConfig cfg;
    cfg.variant = variant;
    DenseMatrix h_hat_m = oracle::random_matrix(rng, n, dh);
    DenseMatrix v0_m = oracle::random_matrix(rng, n, dh);
    DenseMatrix v1_m = oracle::random_matrix(rng, n, dh);
    REQUIRE(denominator_margin(h_hat_m, {v0_m, v1_m}, s_fixed, cfg) > 1e-3);

    Tensor h_hat = Tensor::from_matrix(h_hat_m, true);
    Tensor v0 = Tensor::from_matrix(v0_m, true);
    Tensor v1 = Tensor::from_matrix(v1_m, true);
    Tensor s = Tensor::from_matrix(s_fixed);

    auto f = [&](const std::vector<Tensor>& in) {
      return sgcl_loss(in[0], {in[1], in[2]}, s, cfg).value;
    };
    auto report = grad_check(f, {h_hat, v0, v1}, 1e-5, 1e-4);
    CHECK_MESSAGE(report.passed, cl_variant_name(variant), ": ", report.worst);
  }
}

TEST_CASE("reconstruction gradients pass finite differences") {
  Rng rng(91);
  Tensor x = Tensor::from_matrix(oracle::random_matrix(rng, 3, 4));
  Tensor x_hat = Tensor::from_matrix(oracle::random_matrix(rng, 3, 4), true);
  std::vector<std::uint8_t> mask(3, 1);
  mask[1] = 0;
  auto f = [&](const std::vector<Tensor>& in) {
    return reconstruction_loss({x}, {in[0]}, mask);
  };
  auto report = grad_check(f, {x_hat}, 1e-5, 1e-4);
  CHECK_MESSAGE(report.passed, report.worst);
}
