#pragma once

#include <cstdint>
#include <vector>

#include "matrix.hpp"
#include "tensor.hpp"

namespace mvc {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard Adam with bias-corrected moment estimates, one moment pair per
/// parameter tensor. Parameters without an accumulated gradient are treated
/// as having a zero gradient.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamConfig cfg);

  void zero_grad();
  void step();

  std::size_t step_count() const { return step_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  /// Restore serialized optimizer state (moments per parameter, step count).
  void restore(std::size_t step, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v);

 private:
  std::vector<Tensor> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t step_ = 0;
};

}  // namespace mvc
