#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gpsphs {

/// Objective callback: returns the value at x and, when `gradient` is
/// non-null, fills the gradient. May return +inf to reject a point
/// (e.g. a failed Cholesky during line search).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* gradient)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-3;
  bool record_trace = false;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;        // gradient norm reached tolerance
  std::vector<double> trace;     // accepted objective values, when recorded
};

/// Gradient descent with Armijo backtracking. The initial trial step is
/// carried over from the previous accepted step (doubled), which keeps the
/// method parameter-free while avoiding systematic over-backtracking.
MinimizeResult minimize_gradient_descent(const Objective& objective, Eigen::VectorXd x0,
                                         const MinimizeOptions& options);

}  // namespace gpsphs
