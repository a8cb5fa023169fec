#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mvc {

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst;  // "input 1 entry (2,3): analytic=..., numeric=..."
};

using ScalarFn = std::function<Tensor(const std::vector<Tensor>&)>;

/// Compare the analytic gradient of f (a deterministic scalar-valued tensor
/// function) against central finite differences at every entry of every
/// input. Relative error is |a-n| / max(|a|, |n|, 1e-8). Failures are
/// reported in the result, never thrown.
GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> inputs, double step,
                           double tol);

}  // namespace mvc
