#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "core/grad_check.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "oracles.hpp"

using namespace mvc;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, bool requires_grad = false,
                     double scale = 1.0) {
  return Tensor::from_matrix(oracle::random_matrix(rng, r, c, scale), requires_grad);
}

// grad-check one primitive through a weighted sum so every output entry gets
// a distinct adjoint.
GradCheckReport check_op(const std::function<Tensor(const std::vector<Tensor>&)>& body,
                         std::vector<Tensor> inputs, Rng& rng, double step = 1e-5,
                         double tol = 1e-4) {
  Tensor probe;  // fixed random weights, captured by the closure below
  auto f = [&](const std::vector<Tensor>& in) {
    Tensor out = body(in);
    if (!probe.defined()) {
      Tensor w = random_tensor(rng, out.rows(), out.cols());
      probe = w;
    }
    return sum(hadamard(out, probe));
  };
  return grad_check(f, std::move(inputs), step, tol);
}

}  // namespace

TEST_CASE("matmul by identity returns operand") {
  Rng rng(42);
  Tensor a = random_tensor(rng, 3, 4);
  Tensor out = matmul(Tensor::identity(3), a);
  for (std::size_t i = 0; i < 12; ++i) CHECK(out.values()[i] == a.values()[i]);
}

TEST_CASE("matmul matches triple-loop oracle") {
  Rng rng(7);
  auto a = oracle::random_matrix(rng, 4, 5);
  auto b = oracle::random_matrix(rng, 5, 3);
  Tensor out = matmul(Tensor::from_matrix(a), Tensor::from_matrix(b));
  auto expect = oracle::matmul(a, b);
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(out.values()[i] == doctest::Approx(expect.data[i]).epsilon(1e-12));
}

TEST_CASE("matmul_mix agrees with matmul to high precision") {
  Rng rng(11);
  auto a = oracle::random_matrix(rng, 6, 6);
  auto b = oracle::random_matrix(rng, 6, 4);
  Tensor fast = matmul(Tensor::from_matrix(a), Tensor::from_matrix(b));
  Tensor mixed = matmul_mix(Tensor::from_matrix(a), Tensor::from_matrix(b));
  for (std::size_t i = 0; i < fast.values().size(); ++i)
    CHECK(mixed.values()[i] == doctest::Approx(fast.values()[i]).epsilon(1e-13));
}

TEST_CASE("matmul_mix output does not depend on sample order") {
  // Permuting rows of A and the inner axis consistently must permute the
  // output rows bit-exactly.
  Rng rng(13);
  const std::size_t n = 7, d = 5;
  auto s = oracle::random_matrix(rng, n, n);
  auto r = oracle::random_matrix(rng, n, d);
  std::vector<std::size_t> perm{3, 0, 6, 2, 5, 1, 4};
  DenseMatrix sp(n, n), rp(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sp.at(i, j) = s.at(perm[i], perm[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) rp.at(i, j) = r.at(perm[i], j);

  Tensor base = matmul_mix(Tensor::from_matrix(s), Tensor::from_matrix(r));
  Tensor permuted = matmul_mix(Tensor::from_matrix(sp), Tensor::from_matrix(rp));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      CHECK(permuted.at(i, j) == base.at(perm[i], j));  // bit-exact
}

TEST_CASE("row_softmax analytic cases") {
  Tensor uniform = row_softmax(Tensor::from_values(1, 2, {0.0, 0.0}));
  CHECK(uniform.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(uniform.at(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  Tensor skewed = row_softmax(Tensor::from_values(1, 2, {std::log(2.0), 0.0}));
  CHECK(skewed.at(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(skewed.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("row_softmax rows sum to one with entries in (0,1]") {
  Rng rng(3);
  Tensor s = row_softmax(random_tensor(rng, 6, 8, false, 3.0));
  for (std::size_t i = 0; i < 6; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
      const double v = s.at(i, j);
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("row_softmax survives huge logits") {
  Tensor s = row_softmax(Tensor::from_values(1, 3, {1000.0, 999.0, -1000.0}));
  CHECK(std::isfinite(s.at(0, 0)));
  CHECK(s.at(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("backward of sum gives all-ones gradient") {
  Rng rng(5);
  Tensor a = random_tensor(rng, 3, 4, true);
  backward(sum(a));
  for (double g : a.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of sum of squares gives 2A") {
  Rng rng(6);
  Tensor a = random_tensor(rng, 4, 4, true);
  backward(sum(square(a)));
  for (std::size_t i = 0; i < a.values().size(); ++i)
    CHECK(a.grad()[i] == doctest::Approx(2.0 * a.values()[i]).epsilon(1e-15));
}

TEST_CASE("gradients accumulate over multiple uses") {
  Rng rng(8);
  Tensor a = random_tensor(rng, 3, 3, true);
  Tensor b = random_tensor(rng, 3, 3);

  backward(add(sum(hadamard(a, b)), sum(square(a))));
  std::vector<double> combined = a.grad();

  a.zero_grad();
  backward(sum(hadamard(a, b)));
  std::vector<double> first = a.grad();
  a.zero_grad();
  backward(sum(square(a)));
  std::vector<double> second = a.grad();

  for (std::size_t i = 0; i < combined.size(); ++i)
    CHECK(combined[i] == doctest::Approx(first[i] + second[i]).epsilon(1e-15));
}

TEST_CASE("transpose twice is the identity, exactly") {
  Rng rng(9);
  Tensor a = random_tensor(rng, 5, 3);
  Tensor round = transpose(transpose(a));
  for (std::size_t i = 0; i < a.values().size(); ++i)
    CHECK(round.values()[i] == a.values()[i]);
}

TEST_CASE("concat then slice recovers each part") {
  Rng rng(10);
  Tensor a = random_tensor(rng, 4, 2);
  Tensor b = random_tensor(rng, 4, 3);
  Tensor cat = concat_cols({a, b});
  CHECK(cat.cols() == 5);
  Tensor a2 = slice_cols(cat, 0, 2);
  Tensor b2 = slice_cols(cat, 2, 5);
  for (std::size_t i = 0; i < a.values().size(); ++i) CHECK(a2.values()[i] == a.values()[i]);
  for (std::size_t i = 0; i < b.values().size(); ++i) CHECK(b2.values()[i] == b.values()[i]);
}

TEST_CASE("shape errors name the operation and both shapes") {
  Tensor a = Tensor::zeros(4, 5);
  Tensor b = Tensor::zeros(4, 3);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ShapeError);
  try {
    matmul(a, b);
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4x5") != std::string::npos);
    CHECK(msg.find("4x3") != std::string::npos);
  }
  CHECK_THROWS_AS(add(Tensor::zeros(2, 2), Tensor::zeros(3, 2)), ShapeError);
  CHECK_THROWS_AS(concat_cols({Tensor::zeros(2, 2), Tensor::zeros(3, 2)}), ShapeError);
}

TEST_CASE("log and divide refuse invalid operands instead of producing NaN") {
  CHECK_THROWS_AS(log(Tensor::from_values(1, 2, {1.0, 0.0})), DomainError);
  CHECK_THROWS_AS(log(Tensor::from_values(1, 1, {-2.0})), DomainError);
  CHECK_THROWS_AS(
      divide(Tensor::from_values(1, 2, {1.0, 1.0}), Tensor::from_values(1, 2, {2.0, 0.0})),
      DomainError);
  CHECK_THROWS_AS(sqrt(Tensor::from_values(1, 1, {-1.0})), DomainError);
}

TEST_CASE("backward rejects non-scalar loss and repeated invocation") {
  Rng rng(12);
  Tensor a = random_tensor(rng, 2, 2, true);
  CHECK_THROWS_AS(backward(square(a)), GraphError);

  Tensor loss = sum(square(a));
  backward(loss);
  CHECK_THROWS_AS(backward(loss), GraphError);
}

TEST_CASE("scalar broadcast works for elementwise binaries") {
  Tensor m = Tensor::from_values(2, 2, {1.0, 2.0, 3.0, 4.0});
  Tensor s = Tensor::scalar_value(2.0);
  CHECK(add(m, s).at(1, 1) == 6.0);
  CHECK(sub(m, s).at(0, 0) == -1.0);
  CHECK(hadamard(s, m).at(1, 0) == 6.0);
  CHECK(divide(m, s).at(0, 1) == 1.0);
}

TEST_CASE("every primitive passes randomized finite-difference checks") {
  Rng rng(1234);
  auto in = [&](std::size_t r, std::size_t c, double scale = 1.0) {
    return random_tensor(rng, r, c, true, scale);
  };
  // Inputs for kinked or domain-limited ops are kept away from the kink.
  auto in_positive = [&](std::size_t r, std::size_t c) {
    Tensor t = random_tensor(rng, r, c, true);
    for (double& v : t.mutable_values()) v = 0.5 + std::abs(v);
    return t;
  };
  auto in_away_from_zero = [&](std::size_t r, std::size_t c) {
    Tensor t = random_tensor(rng, r, c, true);
    for (double& v : t.mutable_values())
      if (std::abs(v) < 0.05) v = v < 0 ? v - 0.1 : v + 0.1;
    return t;
  };

  for (int trial = 0; trial < 5; ++trial) {
    CAPTURE(trial);
    auto r1 = check_op([](const std::vector<Tensor>& x) { return matmul(x[0], x[1]); },
                       {in(4, 5), in(5, 3)}, rng);
    CHECK_MESSAGE(r1.passed, "matmul: ", r1.worst);
    auto r1b = check_op([](const std::vector<Tensor>& x) { return matmul_mix(x[0], x[1]); },
                        {in(5, 5), in(5, 4)}, rng);
    CHECK_MESSAGE(r1b.passed, "matmul_mix: ", r1b.worst);
    auto r2 = check_op([](const std::vector<Tensor>& x) { return add(x[0], x[1]); },
                       {in(6, 6), in(6, 6)}, rng);
    CHECK_MESSAGE(r2.passed, "add: ", r2.worst);
    auto r3 = check_op([](const std::vector<Tensor>& x) { return sub(x[0], x[1]); },
                       {in(3, 8), in(3, 8)}, rng);
    CHECK_MESSAGE(r3.passed, "sub: ", r3.worst);
    auto r4 = check_op([](const std::vector<Tensor>& x) { return hadamard(x[0], x[1]); },
                       {in(4, 4), in(4, 4)}, rng);
    CHECK_MESSAGE(r4.passed, "hadamard: ", r4.worst);
    auto r5 = check_op([](const std::vector<Tensor>& x) { return divide(x[0], x[1]); },
                       {in(4, 4), in_positive(4, 4)}, rng);
    CHECK_MESSAGE(r5.passed, "divide: ", r5.worst);
    auto r6 = check_op([](const std::vector<Tensor>& x) { return scalar_mul(x[0], -1.7); },
                       {in(5, 5)}, rng);
    CHECK_MESSAGE(r6.passed, "scalar_mul: ", r6.worst);
    auto r7 = check_op([](const std::vector<Tensor>& x) { return transpose(x[0]); },
                       {in(3, 7)}, rng);
    CHECK_MESSAGE(r7.passed, "transpose: ", r7.worst);
    auto r8 = check_op([](const std::vector<Tensor>& x) { return concat_cols({x[0], x[1]}); },
                       {in(4, 3), in(4, 5)}, rng);
    CHECK_MESSAGE(r8.passed, "concat_cols: ", r8.worst);
    auto r9 = check_op([](const std::vector<Tensor>& x) { return slice_cols(x[0], 2, 6); },
                       {in(4, 8)}, rng);
    CHECK_MESSAGE(r9.passed, "slice_cols: ", r9.worst);
    auto r10 = check_op([](const std::vector<Tensor>& x) { return relu(x[0]); },
                        {in_away_from_zero(6, 6)}, rng);
    CHECK_MESSAGE(r10.passed, "relu: ", r10.worst);
    auto r11 = check_op([](const std::vector<Tensor>& x) { return row_softmax(x[0]); },
                        {in(5, 6)}, rng);
    CHECK_MESSAGE(r11.passed, "row_softmax: ", r11.worst);
    auto r12 = check_op([](const std::vector<Tensor>& x) { return exp(x[0]); }, {in(4, 4)}, rng);
    CHECK_MESSAGE(r12.passed, "exp: ", r12.worst);
    auto r13 = check_op([](const std::vector<Tensor>& x) { return log(x[0]); },
                        {in_positive(4, 4)}, rng);
    CHECK_MESSAGE(r13.passed, "log: ", r13.worst);
    auto r14 = check_op([](const std::vector<Tensor>& x) { return square(x[0]); }, {in(5, 5)},
                        rng);
    CHECK_MESSAGE(r14.passed, "square: ", r14.worst);
    auto r15 = check_op([](const std::vector<Tensor>& x) { return sqrt(x[0]); },
                        {in_positive(4, 4)}, rng);
    CHECK_MESSAGE(r15.passed, "sqrt: ", r15.worst);
    auto r16 = check_op([](const std::vector<Tensor>& x) { return repeat_rows(x[0], 5); },
                        {in(1, 6)}, rng);
    CHECK_MESSAGE(r16.passed, "repeat_rows: ", r16.worst);
    auto r17 = check_op([](const std::vector<Tensor>& x) { return repeat_cols(x[0], 4); },
                        {in(6, 1)}, rng);
    CHECK_MESSAGE(r17.passed, "repeat_cols: ", r17.worst);
    auto r18 = check_op([](const std::vector<Tensor>& x) { return row_l2_norm(x[0]); },
                        {in_away_from_zero(5, 4)}, rng);
    CHECK_MESSAGE(r18.passed, "row_l2_norm: ", r18.worst);
    auto r19 = check_op([](const std::vector<Tensor>& x) { return clamp_min(x[0], 0.0); },
                        {in_away_from_zero(5, 5)}, rng);
    CHECK_MESSAGE(r19.passed, "clamp_min: ", r19.worst);
    auto r20 = check_op([](const std::vector<Tensor>& x) { return row_sum(x[0]); }, {in(6, 3)},
                        rng);
    CHECK_MESSAGE(r20.passed, "row_sum: ", r20.worst);
    auto r21 = grad_check([](const std::vector<Tensor>& x) { return mean(x[0]); }, {in(4, 7)},
                          1e-5, 1e-4);
    CHECK_MESSAGE(r21.passed, "mean: ", r21.worst);
  }
}

TEST_CASE("grad_check passes on a mean-squared reconstruction") {
  Rng rng(77);
  Tensor target = random_tensor(rng, 3, 4);
  auto f = [&](const std::vector<Tensor>& x) { return mean(square(sub(x[0], target))); };
  auto report = grad_check(f, {random_tensor(rng, 3, 4, true)}, 1e-5, 1e-4);
  CHECK_MESSAGE(report.passed, report.worst);
  CHECK(report.entries_checked == 12);
}

TEST_CASE("grad_check confirms the zero gradient of summed softmax rows") {
  // sum(row_softmax(A)) is constant, so both gradients vanish; a larger step
  // keeps the finite-difference noise below the floor of the error metric.
  Rng rng(78);
  auto f = [](const std::vector<Tensor>& x) { return sum(row_softmax(x[0])); };
  auto report = grad_check(f, {random_tensor(rng, 2, 3, true)}, 1e-3, 1e-4);
  CHECK_MESSAGE(report.passed, report.worst);
}

TEST_CASE("grad_check rejects a nonpositive step") {
  Rng rng(79);
  auto f = [](const std::vector<Tensor>& x) { return sum(x[0]); };
  CHECK_THROWS_AS(grad_check(f, {random_tensor(rng, 2, 2, true)}, 0.0, 1e-4), DomainError);
}
