#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "matrix.hpp"

namespace mvc {

// Reverse-mode autodiff over dense 2-D double matrices. Ops execute eagerly
// and record a node per primitive application; node ids increase in creation
// order, which is a topological order of the graph, and backward() replays
// the reachable nodes once in reverse id order. Gradient accumulation order
// is therefore fixed, making runs bit-reproducible under a fixed seed.

enum class Op {
  kLeaf,
  kMatmul,
  kMatmulMix,  // matrix product with order-canonical inner sums (sample-axis mixing)
  kAdd,
  kSub,
  kHadamard,
  kDivide,
  kScalarMul,
  kTranspose,
  kConcatCols,
  kSliceCols,
  kRelu,
  kRowSoftmax,
  kExp,
  kLog,
  kSquare,
  kSqrt,
  kSum,
  kMean,
  kRowSum,
  kRowL2Norm,
  kRepeatRows,
  kRepeatCols,
  kClampMin,
};

const char* op_name(Op op);

namespace detail {

struct Node {
  std::uint64_t id = 0;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily; accumulates until cleared
  bool requires_grad = false;  // leaf parameter
  bool needs_grad = false;     // requires_grad or depends on such a leaf
  bool backward_done = false;
  Op op = Op::kLeaf;
  std::vector<std::shared_ptr<Node>> inputs;
  double scalar = 0.0;   // op payload (factor, clamp floor)
  std::size_t arg0 = 0;  // op payload (slice begin, repeat count)
  std::size_t arg1 = 0;  // op payload (slice end)
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t r, std::size_t c, bool requires_grad = false);
  static Tensor constant(std::size_t r, std::size_t c, double v);
  static Tensor scalar_value(double v);  // 1x1 constant
  static Tensor identity(std::size_t n);
  static Tensor from_values(std::size_t r, std::size_t c, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor from_matrix(const DenseMatrix& m, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const { return node_->n_rows; }
  std::size_t cols() const { return node_->n_cols; }
  bool requires_grad() const { return node_->requires_grad; }

  double at(std::size_t i, std::size_t j) const { return node_->value[i * cols() + j]; }
  /// Value of a 1x1 tensor.
  double item() const;
  const std::vector<double>& values() const { return node_->value; }
  DenseMatrix to_matrix() const;

  bool has_grad() const { return !node_->grad.empty(); }
  const std::vector<double>& grad() const;
  DenseMatrix grad_matrix() const;
  void zero_grad();

  /// Direct access for parameter updates and finite-difference probing.
  /// Mutating a non-leaf invalidates cached downstream values, so only leaves
  /// should ever be touched.
  std::vector<double>& mutable_values() { return node_->value; }

  std::shared_ptr<detail::Node> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op_result(Op, std::vector<Tensor>, std::size_t, std::size_t,
                               std::vector<double>, double, std::size_t, std::size_t);
};

// Primitives. Elementwise binaries accept equal shapes or one 1x1 operand;
// there is no other broadcasting, row/column replication is explicit via
// repeat_rows/repeat_cols.
Tensor matmul(const Tensor& a, const Tensor& b);
/// Matrix product whose inner-axis sums are order-canonical (summands sorted
/// before accumulation). Used where the inner axis indexes samples, so the
/// result does not depend on sample order within a batch.
Tensor matmul_mix(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double k);
Tensor transpose(const Tensor& a);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor relu(const Tensor& a);
Tensor row_softmax(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor row_sum(const Tensor& a);
Tensor row_l2_norm(const Tensor& a);
Tensor repeat_rows(const Tensor& a, std::size_t n);
Tensor repeat_cols(const Tensor& a, std::size_t n);
Tensor clamp_min(const Tensor& a, double floor);

/// Propagate d(loss)/d(tensor) into every reachable leaf with requires_grad.
/// loss must be 1x1; calling it twice on the same node is an error.
void backward(const Tensor& loss);

/// Sum of a multiset of doubles that does not depend on the order of the
/// summands (they are sorted before accumulation).
double canonical_sum(std::vector<double>& terms);

}  // namespace mvc
