#pragma once

#include <cstdint>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpsphs/kernel.hpp"
#include "gpsphs/rng.hpp"

namespace gpsphs {

/// Random Fourier feature expansion of the squared-exponential kernel:
///   f(x) = sum_f weights[f] * cos(frequencies.row(f) . x + phases[f]),
/// with frequencies ~ N(0, 2 Lambda) per coordinate and weights scaled by
/// signal_std * sqrt(2/F) * N(0,1), so that E[f(x) f(x')] = k(x, x').
struct RandomFourierBasis {
  Eigen::MatrixXd frequencies;  // F x d
  Eigen::VectorXd phases;       // F
  Eigen::VectorXd weights;      // F, includes the signal_std * sqrt(2/F) scale

  static RandomFourierBasis draw(const KernelParams& params, int feature_count, Rng& rng);

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd eval_rows(const Eigen::MatrixXd& inputs) const;
};

/// Pathwise posterior sample by Matheron's rule:
///   f(x) = prior(x) + k(x, X)^T v,
///   v = (K + Sigma + jitter I)^{-1} (y - prior(X) - eps),  eps ~ N(0, Sigma + jitter I).
/// The prior part is smooth and globally bounded by construction; ensemble
/// mean and covariance over fresh draws match the exact GP posterior.
struct PathwiseConditionedSample {
  RandomFourierBasis prior;
  Eigen::MatrixXd train_inputs;     // N x d (empty for a pure prior draw)
  KernelParams params;
  Eigen::VectorXd update_coeffs;    // v, length N

  double eval(const Eigen::VectorXd& x) const;
};

/// Draws one conditioned sample. `chol` must factor K + diag(noise) + jitter I
/// over `train_inputs`; pass an empty training set for a pure prior draw.
PathwiseConditionedSample draw_conditioned_sample(
    const Eigen::MatrixXd& train_inputs, const Eigen::VectorXd& targets,
    const Eigen::VectorXd& noise_diag, double jitter, const Eigen::LLT<Eigen::MatrixXd>& chol,
    const KernelParams& params, int feature_count, Rng& rng);

}  // namespace gpsphs
