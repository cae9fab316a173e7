#include "gpsphs/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpsphs {

MinimizeResult minimize_gradient_descent(const Objective& objective, Eigen::VectorXd x0,
                                         const MinimizeOptions& options) {
  constexpr double kArmijo = 1e-4;
  constexpr double kBacktrack = 0.5;
  constexpr double kMinStep = 1e-16;

  MinimizeResult result;
  Eigen::VectorXd grad(x0.size());
  double value = objective(x0, &grad);
  if (!std::isfinite(value)) {
    throw std::runtime_error("minimize_gradient_descent: objective not finite at start");
  }
  if (options.record_trace) result.trace.push_back(value);

  Eigen::VectorXd x = std::move(x0);
  double step = 1.0 / (1.0 + grad.norm());
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    const double g2 = gnorm * gnorm;
    double t = step;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double candidate_value = value;
    while (t >= kMinStep) {
      candidate = x - t * grad;
      candidate_value = objective(candidate, nullptr);
      if (std::isfinite(candidate_value) && candidate_value <= value - kArmijo * t * g2) {
        accepted = true;
        break;
      }
      t *= kBacktrack;
    }
    if (!accepted) break;  // stalled: no admissible step

    x = std::move(candidate);
    const double value_with_grad = objective(x, &grad);
    if (!std::isfinite(value_with_grad)) {
      // Point is admissible but its gradient stencil is not; stop here.
      value = candidate_value;
      grad.setConstant(std::numeric_limits<double>::infinity());
      if (options.record_trace) result.trace.push_back(value);
      ++iter;
      break;
    }
    value = value_with_grad;
    step = 2.0 * t;
    if (options.record_trace) result.trace.push_back(value);
  }

  result.x = std::move(x);
  result.value = value;
  result.gradient_norm = grad.norm();
  result.iterations = iter;
  if (result.gradient_norm <= options.gradient_tolerance) result.converged = true;
  return result;
}

}  // namespace gpsphs
