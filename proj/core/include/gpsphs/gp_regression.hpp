#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpsphs/kernel.hpp"
#include "gpsphs/optimize.hpp"

namespace gpsphs {

struct PosteriorGaussian {
  double mean = 0.0;
  double variance = 0.0;  // clamped at zero; tiny negative Schur round-off is absorbed
};

/// Exact GP regression model with cached Cholesky factor and weights.
/// Immutable after fit(); safe to share across threads.
struct GpModel {
  Eigen::MatrixXd inputs;   // N x d
  Eigen::VectorXd targets;  // N
  KernelParams params;
  Eigen::VectorXd noise;    // N per-point noise variances
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol;  // factor of K = K_se + diag(noise) + jitter I
  Eigen::VectorXd alpha;             // K^{-1} targets

  Eigen::Index size() const { return inputs.rows(); }

  /// Posterior mean/variance at a query point.
  PosteriorGaussian posterior(const Eigen::VectorXd& x) const;

  /// Posterior of the derivative process at a scalar query, for 1-D inputs:
  /// mean k^(1)(t,T)^T K^{-1} y, variance k^(1,2)(t,t) - k^(1)^T K^{-1} k^(1).
  PosteriorGaussian posterior_derivative(double t) const;
};

/// Fit with fixed hyperparameters. noise has length N or 1 (broadcast).
/// N = 0 is allowed and yields the prior (used by pathwise sampling).
GpModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
            const Eigen::VectorXd& noise, const KernelParams& params);

/// Noise model used by the marginal-likelihood machinery: either learned as
/// a single homoscedastic variance (one extra log-parameter) or supplied as
/// fixed per-point variances.
struct NoiseSpec {
  enum class Kind { learn, fixed };
  Kind kind = Kind::learn;
  Eigen::VectorXd fixed;  // length N or 1 when kind == fixed

  static NoiseSpec learned() { return NoiseSpec{Kind::learn, {}}; }
  static NoiseSpec fixed_value(double variance);
  static NoiseSpec fixed_vector(Eigen::VectorXd variances);
};

struct NlmlResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Negative log marginal likelihood with analytic gradient.
///
/// log_params packs [log signal_std, log lengthscale_diag..., (log noise
/// variance when learned)]. The N/2 log(2 pi) constant is included so values
/// are comparable across noise models. Returns +inf (empty gradient) when
/// the Cholesky fails, so optimizers treat the point as inadmissible.
NlmlResult nlml(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                const NoiseSpec& noise_spec, const Eigen::VectorXd& log_params,
                bool want_gradient = true);

struct OptimizeOptions {
  int restarts = 2;
  int max_iterations = 500;
  double gradient_tolerance = 1e-3;
  double init_low = 1e-2;   // log-uniform restart draws over [init_low, init_high]
  double init_high = 1e1;
  bool record_trace = false;
};

struct OptimizeResult {
  KernelParams params;
  Eigen::VectorXd noise;     // resolved per-point variances (learned or fixed)
  double nlml = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  int best_restart = -1;
  std::vector<double> trace;  // accepted NLML values of the best restart
};

/// Multi-restart hyperparameter optimization by gradient descent with Armijo
/// backtracking on the NLML. Deterministic given the seed. Throws when every
/// restart fails numerically, with per-restart diagnostics in the message.
OptimizeResult optimize_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                    const NoiseSpec& noise_spec, const OptimizeOptions& options,
                                    std::uint64_t seed);

}  // namespace gpsphs
