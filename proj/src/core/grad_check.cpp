#include "grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace mvc {

GradCheckReport grad_check(const ScalarFn& f, std::vector<Tensor> inputs, double step,
                           double tol) {
  if (step <= 0.0) throw DomainError("grad_check: step must be > 0, got " + std::to_string(step));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].defined() || !inputs[k].requires_grad()) {
      throw DomainError("grad_check: input " + std::to_string(k) + " must require gradients");
    }
  }

  for (Tensor& t : inputs) t.zero_grad();
  Tensor loss = f(inputs);
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("grad_check: f must return a 1x1 tensor, got " +
                     shape_str(loss.rows(), loss.cols()));
  }
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (Tensor& t : inputs) analytic.push_back(t.grad());

  GradCheckReport report;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<double>& vals = inputs[k].mutable_values();
    for (std::size_t e = 0; e < vals.size(); ++e) {
      const double saved = vals[e];
      vals[e] = saved + step;
      const double f_plus = f(inputs).item();
      vals[e] = saved - step;
      const double f_minus = f(inputs).item();
      vals[e] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double a = analytic[k][e];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-8});
      ++report.entries_checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = "input " + std::to_string(k) + " entry (" +
                       std::to_string(e / inputs[k].cols()) + "," +
                       std::to_string(e % inputs[k].cols()) + "): analytic=" +
                       std::to_string(a) + ", numeric=" + std::to_string(numeric);
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace mvc
