#include "tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

#include "error.hpp"
#include "parallel.hpp"

namespace mvc {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

std::shared_ptr<detail::Node> new_node() {
  auto n = std::make_shared<detail::Node>();
  n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return n;
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b,
                             const char* detail_msg) {
  throw ShapeError(std::string(op) + ": " + detail_msg + " (lhs " +
                   shape_str(a.rows(), a.cols()) + ", rhs " +
                   shape_str(b.rows(), b.cols()) + ")");
}

bool is_scalar_shape(const Tensor& t) { return t.rows() == 1 && t.cols() == 1; }

thread_local std::vector<double> t_scratch;

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatmul: return "matmul";
    case Op::kMatmulMix: return "matmul_mix";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kHadamard: return "hadamard";
    case Op::kDivide: return "divide";
    case Op::kScalarMul: return "scalar_mul";
    case Op::kTranspose: return "transpose";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSliceCols: return "slice_cols";
    case Op::kRelu: return "relu";
    case Op::kRowSoftmax: return "row_softmax";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSquare: return "square";
    case Op::kSqrt: return "sqrt";
    case Op::kSum: return "sum";
    case Op::kMean: return "mean";
    case Op::kRowSum: return "row_sum";
    case Op::kRowL2Norm: return "row_l2_norm";
    case Op::kRepeatRows: return "repeat_rows";
    case Op::kRepeatCols: return "repeat_cols";
    case Op::kClampMin: return "clamp_min";
  }
  return "?";
}

double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

// ---------------------------------------------------------------------------
// Construction

Tensor Tensor::zeros(std::size_t r, std::size_t c, bool requires_grad) {
  return from_values(r, c, std::vector<double>(r * c, 0.0), requires_grad);
}

Tensor Tensor::constant(std::size_t r, std::size_t c, double v) {
  return from_values(r, c, std::vector<double>(r * c, v), false);
}

Tensor Tensor::scalar_value(double v) { return constant(1, 1, v); }

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> vals(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vals[i * n + i] = 1.0;
  return from_values(n, n, std::move(vals), false);
}

Tensor Tensor::from_values(std::size_t r, std::size_t c, std::vector<double> values,
                           bool requires_grad) {
  if (values.size() != r * c) {
    throw ShapeError("tensor: " + shape_str(r, c) + " needs " + std::to_string(r * c) +
                     " values, got " + std::to_string(values.size()));
  }
  auto n = new_node();
  n->n_rows = r;
  n->n_cols = c;
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  n->needs_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from_matrix(const DenseMatrix& m, bool requires_grad) {
  return from_values(m.rows, m.cols, m.data, requires_grad);
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) {
    throw ShapeError("item: tensor is " + shape_str(rows(), cols()) + ", expected 1x1");
  }
  return node_->value[0];
}

DenseMatrix Tensor::to_matrix() const { return DenseMatrix(rows(), cols(), node_->value); }

const std::vector<double>& Tensor::grad() const {
  if (node_->grad.empty()) {
    throw GraphError("grad: no gradient present (run backward first)");
  }
  return node_->grad;
}

DenseMatrix Tensor::grad_matrix() const { return DenseMatrix(rows(), cols(), grad()); }

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

// ---------------------------------------------------------------------------
// Op plumbing

Tensor make_op_result(Op op, std::vector<Tensor> inputs, std::size_t r, std::size_t c,
                      std::vector<double> value, double scalar, std::size_t arg0,
                      std::size_t arg1) {
  auto n = new_node();
  n->n_rows = r;
  n->n_cols = c;
  n->value = std::move(value);
  n->op = op;
  n->scalar = scalar;
  n->arg0 = arg0;
  n->arg1 = arg1;
  n->inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    if (!t.defined()) throw ShapeError(std::string(op_name(op)) + ": undefined operand");
    n->needs_grad = n->needs_grad || t.node()->needs_grad;
    n->inputs.push_back(t.node());
  }
  return Tensor(std::move(n));
}

namespace {

Tensor unary_result(Op op, const Tensor& a, std::vector<double> value) {
  return make_op_result(op, {a}, a.rows(), a.cols(), std::move(value), 0.0, 0, 0);
}

void check_same_or_scalar(const char* op, const Tensor& a, const Tensor& b) {
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  if (!same && !is_scalar_shape(a) && !is_scalar_shape(b)) {
    shape_fail(op, a, b, "shapes must match or one operand must be 1x1");
  }
}

// Applies f elementwise over (a, b) honoring 1x1 broadcast of either side.
template <typename F>
Tensor elementwise(Op op, const char* name, const Tensor& a, const Tensor& b, F f) {
  check_same_or_scalar(name, a, b);
  const Tensor& big = is_scalar_shape(a) && !is_scalar_shape(b) ? b : a;
  const std::size_t r = big.rows(), c = big.cols();
  std::vector<double> out(r * c);
  const auto& av = a.values();
  const auto& bv = b.values();
  const bool sa = is_scalar_shape(a), sb = is_scalar_shape(b);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = f(sa ? av[0] : av[i], sb ? bv[0] : bv[i], i, c);
  }
  return make_op_result(op, {a, b}, r, c, std::move(out), 0.0, 0, 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward ops

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul", a, b, "inner dimensions differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double* out_row = out.data() + i * m;
      const double* a_row = av + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double aik = a_row[kk];
        const double* b_row = bv + kk * m;
        for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
      }
    }
  });
  return make_op_result(Op::kMatmul, {a, b}, n, m, std::move(out), 0.0, 0, 0);
}

Tensor matmul_mix(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_fail("matmul_mix", a, b, "inner dimensions differ");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> out(n * m, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  parallel_rows(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double>& terms = t_scratch;
    for (std::size_t i = lo; i < hi; ++i) {
      const double* a_row = av + i * k;
      for (std::size_t j = 0; j < m; ++j) {
        terms.resize(k);
        for (std::size_t kk = 0; kk < k; ++kk) terms[kk] = a_row[kk] * bv[kk * m + j];
        out[i * m + j] = canonical_sum(terms);
      }
    }
  });
  return make_op_result(Op::kMatmulMix, {a, b}, n, m, std::move(out), 0.0, 0, 0);
}

Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(Op::kAdd, "add", a, b,
                     [](double x, double y, std::size_t, std::size_t) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return elementwise(Op::kSub, "sub", a, b,
                     [](double x, double y, std::size_t, std::size_t) { return x - y; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return elementwise(Op::kHadamard, "hadamard", a, b,
                     [](double x, double y, std::size_t, std::size_t) { return x * y; });
}

Tensor divide(const Tensor& a, const Tensor& b) {
  return elementwise(Op::kDivide, "divide", a, b,
                     [](double x, double y, std::size_t idx, std::size_t c) {
                       if (y == 0.0) {
                         throw DomainError("divide: zero denominator at (" +
                                           std::to_string(idx / c) + "," +
                                           std::to_string(idx % c) + ")");
                       }
                       return x / y;
                     });
}

Tensor scalar_mul(const Tensor& a, double k) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * k;
  return make_op_result(Op::kScalarMul, {a}, a.rows(), a.cols(), std::move(out), k, 0, 0);
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = a.values()[i * c + j];
  return make_op_result(Op::kTranspose, {a}, c, r, std::move(out), 0.0, 0, 0);
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t r = parts[0].rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != r) {
      throw ShapeError("concat_cols: row counts differ (" + shape_str(parts[0].rows(), parts[0].cols()) +
                       " vs " + shape_str(p.rows(), p.cols()) + ")");
    }
    total += p.cols();
  }
  std::vector<double> out(r * total);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.cols();
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(p.values().data() + i * c, c, out.data() + i * total + offset);
    }
    offset += c;
  }
  return make_op_result(Op::kConcatCols, parts, r, total, std::move(out), 0.0, 0, 0);
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  if (begin >= end || end > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + shape_str(a.rows(), a.cols()));
  }
  const std::size_t r = a.rows(), c = end - begin;
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(a.values().data() + i * a.cols() + begin, c, out.data() + i * c);
  }
  return make_op_result(Op::kSliceCols, {a}, r, c, std::move(out), 0.0, begin, end);
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
  return unary_result(Op::kRelu, a, std::move(out));
}

Tensor row_softmax(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  std::vector<double> terms;
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.values().data() + i * c;
    double* y = out.data() + i * c;
    // Subtract the row max before exponentiation; mathematically an identity,
    // keeps exp from overflowing.
    double m = x[0];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, x[j]);
    terms.resize(c);
    for (std::size_t j = 0; j < c; ++j) terms[j] = y[j] = std::exp(x[j] - m);
    const double denom = canonical_sum(terms);
    for (std::size_t j = 0; j < c; ++j) y[j] /= denom;
  }
  return unary_result(Op::kRowSoftmax, a, std::move(out));
}

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.values()[i]);
  return unary_result(Op::kExp, a, std::move(out));
}

Tensor log(const Tensor& a) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = a.values()[i];
    if (v <= 0.0) {
      throw DomainError("log: nonpositive operand " + std::to_string(v) + " at (" +
                        std::to_string(i / a.cols()) + "," + std::to_string(i % a.cols()) + ")");
    }
    out[i] = std::log(v);
  }
  return unary_result(Op::kLog, a, std::move(out));
}

Tensor square(const Tensor& a) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * a.values()[i];
  return unary_result(Op::kSquare, a, std::move(out));
}

Tensor sqrt(const Tensor& a) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = a.values()[i];
    if (v < 0.0) {
      throw DomainError("sqrt: negative operand " + std::to_string(v) + " at (" +
                        std::to_string(i / a.cols()) + "," + std::to_string(i % a.cols()) + ")");
    }
    out[i] = std::sqrt(v);
  }
  return unary_result(Op::kSqrt, a, std::move(out));
}

Tensor sum(const Tensor& a) {
  std::vector<double> terms(a.values());
  return make_op_result(Op::kSum, {a}, 1, 1, {canonical_sum(terms)}, 0.0, 0, 0);
}

Tensor mean(const Tensor& a) {
  std::vector<double> terms(a.values());
  const double s = canonical_sum(terms);
  return make_op_result(Op::kMean, {a}, 1, 1, {s / static_cast<double>(terms.size())}, 0.0, 0, 0);
}

Tensor row_sum(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r);
  std::vector<double> terms;
  for (std::size_t i = 0; i < r; ++i) {
    terms.assign(a.values().begin() + i * c, a.values().begin() + (i + 1) * c);
    out[i] = canonical_sum(terms);
  }
  return make_op_result(Op::kRowSum, {a}, r, 1, std::move(out), 0.0, 0, 0);
}

Tensor row_l2_norm(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r);
  std::vector<double> terms(c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = a.values().data() + i * c;
    for (std::size_t j = 0; j < c; ++j) terms[j] = x[j] * x[j];
    out[i] = std::sqrt(canonical_sum(terms));
  }
  return make_op_result(Op::kRowL2Norm, {a}, r, 1, std::move(out), 0.0, 0, 0);
}

Tensor repeat_rows(const Tensor& a, std::size_t n) {
  if (a.rows() != 1) {
    throw ShapeError("repeat_rows: operand must be 1xC, got " + shape_str(a.rows(), a.cols()));
  }
  const std::size_t c = a.cols();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(a.values().data(), c, out.data() + i * c);
  return make_op_result(Op::kRepeatRows, {a}, n, c, std::move(out), 0.0, n, 0);
}

Tensor repeat_cols(const Tensor& a, std::size_t n) {
  if (a.cols() != 1) {
    throw ShapeError("repeat_cols: operand must be Rx1, got " + shape_str(a.rows(), a.cols()));
  }
  const std::size_t r = a.rows();
  std::vector<double> out(r * n);
  for (std::size_t i = 0; i < r; ++i) {
    std::fill_n(out.data() + i * n, n, a.values()[i]);
  }
  return make_op_result(Op::kRepeatCols, {a}, r, n, std::move(out), 0.0, n, 0);
}

Tensor clamp_min(const Tensor& a, double floor) {
  std::vector<double> out(a.values().size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = a.values()[i] > floor ? a.values()[i] : floor;
  return make_op_result(Op::kClampMin, {a}, a.rows(), a.cols(), std::move(out), floor, 0, 0);
}

// ---------------------------------------------------------------------------
// Backward

namespace {

using detail::Node;

void ensure_grad(Node* n) {
  if (n->grad.empty()) n->grad.assign(n->value.size(), 0.0);
}

// Accumulates the gradient g into input `in`, which may be a broadcast 1x1.
void accumulate_maybe_scalar(Node* in, const std::vector<double>& g,
                             const std::vector<double>& factor, bool has_factor) {
  ensure_grad(in);
  if (in->value.size() == 1 && g.size() > 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += has_factor ? g[i] * factor[i] : g[i];
    in->grad[0] += acc;
  } else {
    for (std::size_t i = 0; i < g.size(); ++i)
      in->grad[i] += has_factor ? g[i] * factor[i] : g[i];
  }
}

void backward_node(Node* n) {
  const std::vector<double>& g = n->grad;
  auto in = [&](std::size_t i) { return n->inputs[i].get(); };
  auto needs = [&](std::size_t i) { return n->inputs[i]->needs_grad; };

  switch (n->op) {
    case Op::kLeaf:
      break;

    case Op::kMatmul:
    case Op::kMatmulMix: {
      Node* a = in(0);
      Node* b = in(1);
      const std::size_t nr = a->n_rows, k = a->n_cols, m = b->n_cols;
      if (needs(0)) {
        ensure_grad(a);
        for (std::size_t i = 0; i < nr; ++i)
          for (std::size_t kk = 0; kk < k; ++kk) {
            double acc = 0.0;
            const double* g_row = g.data() + i * m;
            const double* b_row = b->value.data() + kk * m;
            for (std::size_t j = 0; j < m; ++j) acc += g_row[j] * b_row[j];
            a->grad[i * k + kk] += acc;
          }
      }
      if (needs(1)) {
        ensure_grad(b);
        for (std::size_t kk = 0; kk < k; ++kk)
          for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < nr; ++i) acc += a->value[i * k + kk] * g[i * m + j];
            b->grad[kk * m + j] += acc;
          }
      }
      break;
    }

    case Op::kAdd: {
      if (needs(0)) accumulate_maybe_scalar(in(0), g, {}, false);
      if (needs(1)) accumulate_maybe_scalar(in(1), g, {}, false);
      break;
    }

    case Op::kSub: {
      if (needs(0)) accumulate_maybe_scalar(in(0), g, {}, false);
      if (needs(1)) {
        Node* b = in(1);
        ensure_grad(b);
        if (b->value.size() == 1 && g.size() > 1) {
          double acc = 0.0;
          for (double v : g) acc += v;
          b->grad[0] -= acc;
        } else {
          for (std::size_t i = 0; i < g.size(); ++i) b->grad[i] -= g[i];
        }
      }
      break;
    }

    case Op::kHadamard: {
      Node* a = in(0);
      Node* b = in(1);
      const bool sa = a->value.size() == 1 && g.size() > 1;
      const bool sb = b->value.size() == 1 && g.size() > 1;
      if (needs(0)) {
        std::vector<double> factor(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) factor[i] = sb ? b->value[0] : b->value[i];
        accumulate_maybe_scalar(a, g, factor, true);
      }
      if (needs(1)) {
        std::vector<double> factor(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) factor[i] = sa ? a->value[0] : a->value[i];
        accumulate_maybe_scalar(b, g, factor, true);
      }
      break;
    }

    case Op::kDivide: {
      Node* a = in(0);
      Node* b = in(1);
      const bool sa = a->value.size() == 1 && g.size() > 1;
      const bool sb = b->value.size() == 1 && g.size() > 1;
      if (needs(0)) {
        std::vector<double> factor(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
          factor[i] = 1.0 / (sb ? b->value[0] : b->value[i]);
        accumulate_maybe_scalar(a, g, factor, true);
      }
      if (needs(1)) {
        std::vector<double> factor(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double av = sa ? a->value[0] : a->value[i];
          const double bv = sb ? b->value[0] : b->value[i];
          factor[i] = -av / (bv * bv);
        }
        accumulate_maybe_scalar(b, g, factor, true);
      }
      break;
    }

    case Op::kScalarMul: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * n->scalar;
      }
      break;
    }

    case Op::kTranspose: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t r = n->n_rows, c = n->n_cols;  // output shape
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) a->grad[j * r + i] += g[i * c + j];
      }
      break;
    }

    case Op::kConcatCols: {
      std::size_t offset = 0;
      const std::size_t total = n->n_cols;
      for (std::size_t p = 0; p < n->inputs.size(); ++p) {
        Node* a = in(p);
        const std::size_t c = a->n_cols;
        if (a->needs_grad) {
          ensure_grad(a);
          for (std::size_t i = 0; i < a->n_rows; ++i)
            for (std::size_t j = 0; j < c; ++j) a->grad[i * c + j] += g[i * total + offset + j];
        }
        offset += c;
      }
      break;
    }

    case Op::kSliceCols: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t begin = n->arg0, c = n->n_cols;
        for (std::size_t i = 0; i < n->n_rows; ++i)
          for (std::size_t j = 0; j < c; ++j)
            a->grad[i * a->n_cols + begin + j] += g[i * c + j];
      }
      break;
    }

    case Op::kRelu: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (a->value[i] > 0.0) a->grad[i] += g[i];
      }
      break;
    }

    case Op::kRowSoftmax: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t r = n->n_rows, c = n->n_cols;
        for (std::size_t i = 0; i < r; ++i) {
          const double* y = n->value.data() + i * c;
          const double* gy = g.data() + i * c;
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += gy[j] * y[j];
          for (std::size_t j = 0; j < c; ++j) a->grad[i * c + j] += y[j] * (gy[j] - dot);
        }
      }
      break;
    }

    case Op::kExp: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * n->value[i];
      }
      break;
    }

    case Op::kLog: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] / a->value[i];
      }
      break;
    }

    case Op::kSquare: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) a->grad[i] += g[i] * 2.0 * a->value[i];
      }
      break;
    }

    case Op::kSqrt: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          // Subgradient 0 at sqrt(0); anything downstream of a zero norm has
          // been clamped anyway.
          if (n->value[i] > 0.0) a->grad[i] += g[i] * 0.5 / n->value[i];
        }
      }
      break;
    }

    case Op::kSum: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += g[0];
      }
      break;
    }

    case Op::kMean: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const double k = g[0] / static_cast<double>(a->value.size());
        for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad[i] += k;
      }
      break;
    }

    case Op::kRowSum: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t c = a->n_cols;
        for (std::size_t i = 0; i < a->n_rows; ++i)
          for (std::size_t j = 0; j < c; ++j) a->grad[i * c + j] += g[i];
      }
      break;
    }

    case Op::kRowL2Norm: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t c = a->n_cols;
        for (std::size_t i = 0; i < a->n_rows; ++i) {
          const double norm = n->value[i];
          if (norm == 0.0) continue;  // subgradient 0 for an all-zero row
          for (std::size_t j = 0; j < c; ++j)
            a->grad[i * c + j] += g[i] * a->value[i * c + j] / norm;
        }
      }
      break;
    }

    case Op::kRepeatRows: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t c = n->n_cols;
        for (std::size_t i = 0; i < n->n_rows; ++i)
          for (std::size_t j = 0; j < c; ++j) a->grad[j] += g[i * c + j];
      }
      break;
    }

    case Op::kRepeatCols: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        const std::size_t c = n->n_cols;
        for (std::size_t i = 0; i < n->n_rows; ++i)
          for (std::size_t j = 0; j < c; ++j) a->grad[i] += g[i * c + j];
      }
      break;
    }

    case Op::kClampMin: {
      if (needs(0)) {
        Node* a = in(0);
        ensure_grad(a);
        for (std::size_t i = 0; i < g.size(); ++i)
          if (a->value[i] > n->scalar) a->grad[i] += g[i];
      }
      break;
    }
  }
}

}  // namespace

void backward(const Tensor& loss) {
  if (!loss.defined()) throw GraphError("backward: undefined loss tensor");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw GraphError("backward: loss must be 1x1, got " + shape_str(loss.rows(), loss.cols()));
  }
  Node* root = loss.node().get();
  if (root->backward_done) {
    throw GraphError("backward: already invoked on this graph; run a new forward first");
  }
  if (!root->needs_grad) {
    root->backward_done = true;
    return;  // nothing reachable requires gradients
  }

  // Collect reachable grad-needing nodes, then replay in reverse creation
  // order (a topological order, since inputs always predate outputs).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root};
  seen.insert(root);
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& in : n->inputs) {
      if (in->needs_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });

  ensure_grad(root);
  root->grad[0] += 1.0;
  for (Node* n : order) backward_node(n);
  root->backward_done = true;
}

}  // namespace mvc
