#include "adam.hpp"

#include <cmath>

#include "error.hpp"

namespace mvc {

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    if (!p.requires_grad()) throw DomainError("adam: parameter does not require gradients");
    m_.emplace_back(p.values().size(), 0.0);
    v_.emplace_back(p.values().size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    const bool has_grad = p.has_grad();
    std::vector<double>& values = p.mutable_values();
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = has_grad ? p.grad()[i] : 0.0;
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      values[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void Adam::restore(std::size_t step, std::vector<std::vector<double>> m,
                   std::vector<std::vector<double>> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw ShapeError("adam: restored state covers " + std::to_string(m.size()) +
                     " parameters, expected " + std::to_string(params_.size()));
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (m[k].size() != params_[k].values().size() || v[k].size() != params_[k].values().size()) {
      throw ShapeError("adam: restored moment size mismatch at parameter " + std::to_string(k));
    }
  }
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace mvc
