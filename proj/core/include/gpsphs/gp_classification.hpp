#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "gpsphs/gp_regression.hpp"
#include "gpsphs/kernel.hpp"
#include "gpsphs/pathwise.hpp"

namespace gpsphs {

/// One-vs-rest binary Laplace classifier for a single mode, with the caches
/// needed for prediction and pathwise posterior sampling.
struct LaplaceClass {
  int mode_id = 0;
  Eigen::VectorXd labels;       // +-1 per training point
  KernelParams params;
  Eigen::VectorXd latent_mode;  // f_hat, Newton mode of the Laplace objective
  Eigen::VectorXd w_diag;       // pi (1 - pi), floored for numerical stability
  Eigen::VectorXd grad_loglik;  // (y+1)/2 - pi at f_hat
  double evidence = 0.0;        // Laplace approximation of log p(y | X, theta)
  int newton_iterations = 0;

  // Prediction caches (rebuilt on load, not serialized).
  Eigen::VectorXd sqrt_w;
  Eigen::LLT<Eigen::MatrixXd> b_chol;         // I + W^1/2 K W^1/2
  Eigen::LLT<Eigen::MatrixXd> matheron_chol;  // K + W^-1 + jitter I
  double matheron_jitter = 0.0;
};

struct ClassifierOptions {
  OptimizeOptions optimize{.restarts = 1, .max_iterations = 30};
  int newton_max_iterations = 100;
  double newton_tolerance = 1e-8;   // infinity-norm latent change
  double fd_step = 1e-4;            // central-difference step for evidence gradients
  // Log-normal hyperprior scale (in nats) around unit hyperparameters; for
  // separable labels the bare Laplace evidence grows without bound in the
  // signal amplitude, which wrecks the predictive calibration. 0 disables.
  double hyperprior_log_scale = 1.0;
};

/// GP classifier over mode labels {1, ..., n_modes}: one Laplace-approximated
/// binary classifier per mode (one-vs-rest), logistic likelihood.
struct SwitchingClassifier {
  Eigen::MatrixXd inputs;  // N x n state estimates
  std::vector<int> modes;  // measured labels, 1-based
  int n_modes = 0;
  std::vector<LaplaceClass> classes;

  /// Per-class probabilities by the probit-form approximation of the
  /// logistic-Gaussian predictive integral, normalized across classes.
  Eigen::VectorXd predict_mode_probability(const Eigen::VectorXd& x) const;

  /// Argmax of predict_mode_probability; ties break to the lowest mode id.
  int predict_mode(const Eigen::VectorXd& x) const;

  double training_accuracy() const;

  /// Rebuild Newton/Cholesky caches from (inputs, modes, per-class params).
  /// Used after deserialization.
  void rebuild(const ClassifierOptions& options = {});
};

/// Trains per-class kernel hyperparameters by minimizing the negative Laplace
/// evidence with the shared multi-restart gradient-descent scheme (gradients
/// by central finite differences). For exactly two modes, the second class is
/// the label-flip mirror of the first and is derived rather than re-trained.
SwitchingClassifier train_classifier(const Eigen::MatrixXd& states, const std::vector<int>& modes,
                                     const ClassifierOptions& options, std::uint64_t seed);

/// Deterministic pathwise sample of the switching policy: one conditioned
/// latent sample per class (Matheron's rule against the Laplace-equivalent
/// regression with pseudo-targets f_hat + W^-1 grad and noise W^-1), with
/// the mode given by the argmax of the sampled latents.
struct SwitchingPolicySample {
  std::vector<PathwiseConditionedSample> latents;  // one per mode
  std::uint64_t seed = 0;

  int operator()(const Eigen::VectorXd& x) const;
  Eigen::VectorXd latent_values(const Eigen::VectorXd& x) const;
  long tie_count() const { return ties_; }

 private:
  friend SwitchingPolicySample sample_switching_policy(const SwitchingClassifier&, int,
                                                       std::uint64_t);
  mutable long ties_ = 0;
};

SwitchingPolicySample sample_switching_policy(const SwitchingClassifier& classifier,
                                              int feature_count, std::uint64_t seed);

}  // namespace gpsphs
