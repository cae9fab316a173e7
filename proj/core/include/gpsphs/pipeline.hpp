#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpsphs/gp_classification.hpp"
#include "gpsphs/gp_regression.hpp"
#include "gpsphs/sphs.hpp"

namespace gpsphs {

/// Timestamped noisy observations of one or more trajectories of a switching
/// system: states, inputs, and measured modes.
struct TrajectoryDataset {
  Eigen::VectorXd times;             // N, seconds, strictly increasing per trajectory
  Eigen::MatrixXd states;            // N x n, noisy measurements
  Eigen::MatrixXd inputs;            // N x m
  std::vector<int> modes;            // N, 1-based mode ids
  std::vector<int> trajectory_ids;   // N, contiguous blocks per trajectory

  Eigen::Index size() const { return times.size(); }
  Eigen::Index state_dim() const { return states.cols(); }
  Eigen::Index input_dim() const { return inputs.cols(); }

  /// Contiguous [begin, end) row ranges, one per trajectory, in file order.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> trajectory_ranges() const;

  /// Throws on inconsistent sizes, non-monotone times within a trajectory,
  /// or mode ids outside {1, ..., n_modes} (n_modes <= 0 skips the check).
  void validate(int n_modes = 0) const;
};

struct SurrogateDiagnostics {
  int trajectory_id = 0;
  int dim = 0;
  KernelParams params;
  double noise_variance = 0.0;
  double nlml = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Outputs of the per-trajectory, per-dimension time-surrogate GPs:
/// denoised states, state-derivative estimates, and derivative variances at
/// the sample times.
struct SurrogateFit {
  Eigen::MatrixXd denoised_states;       // N x n
  Eigen::MatrixXd derivative_means;      // N x n
  Eigen::MatrixXd derivative_variances;  // N x n
  std::vector<SurrogateDiagnostics> diagnostics;
};

struct SurrogateOptions {
  // The time-GP marginal likelihood is multi-modal on switching trajectories
  // (an over-smoothed all-noise basin competes with the sharp fit), so the
  // surrogate defaults to more restarts than the downstream GPs.
  OptimizeOptions optimize{.restarts = 8, .max_iterations = 400};
};

/// Trains one GP per state dimension per trajectory on (t, x_j) with learned
/// homoscedastic noise, then evaluates the posterior and its derivative at
/// the sample times.
SurrogateFit fit_surrogate(const TrajectoryDataset& dataset, const SurrogateOptions& options,
                           std::uint64_t seed);

/// Per-dimension training data for the Hamiltonian-gradient GPs.
struct HamiltonianTrainingSet {
  struct Dim {
    Eigen::MatrixXd inputs;           // N_j x n denoised states
    Eigen::VectorXd targets;          // N_j
    Eigen::VectorXd noise_variances;  // N_j propagated derivative variances
    std::vector<Eigen::Index> index_set;
  };
  std::vector<Dim> dims;
};

struct HamiltonianDatasetOptions {
  double rank_tolerance_factor = 1e-8;   // rank cut at factor * sigma_max
  double basis_tolerance = 1e-8;         // e_j membership in the row space
  double column_space_tolerance = 1e-3;  // relative residual of b against col(A)
};

/// Builds the gradient-of-H dataset by inverting A_i = J - R at each sample.
/// For invertible A_i every dimension receives the sample with p^j = row j of
/// A_i^{-1}; for singular A_i a dimension j is used only when e_j lies in the
/// span of the leading right-singular vectors and b_i lies in the column
/// space, with p^j taken from the pseudo-inverse. Target noise is the
/// diagonal propagation sum_k (p^j_k)^2 var(xdot_k).
HamiltonianTrainingSet build_hamiltonian_dataset(const SphsStructure& structure,
                                                 const SurrogateFit& surrogate,
                                                 const Eigen::MatrixXd& inputs_u,
                                                 const std::vector<int>& modes,
                                                 const HamiltonianDatasetOptions& options = {});

struct HamiltonianDimDiagnostics {
  Eigen::Index n_points = 0;
  KernelParams params;
  double nlml = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// n independent GPs over state space housing the components of grad H.
struct HamiltonianGP {
  std::vector<GpModel> dims;
  std::vector<HamiltonianDimDiagnostics> diagnostics;

  Eigen::Index state_dim() const { return static_cast<Eigen::Index>(dims.size()); }

  /// Posterior-mean gradient field (the non-sampled point estimate).
  GradientField mean_field() const;
};

/// Fits one GP per dimension with fixed heteroscedastic noise (the propagated
/// derivative variances); hyperparameters by NLML, noise not learned.
HamiltonianGP fit_hamiltonian_gp(const HamiltonianTrainingSet& hset,
                                 const OptimizeOptions& options, std::uint64_t seed);

struct ClassifierDataset {
  Eigen::MatrixXd states;  // denoised
  std::vector<int> modes;  // measured
};

ClassifierDataset build_classifier_dataset(const SurrogateFit& surrogate,
                                           const std::vector<int>& modes);

struct TrainConfig {
  SurrogateOptions surrogate;
  HamiltonianDatasetOptions hamiltonian_dataset;
  OptimizeOptions hamiltonian{.restarts = 1, .max_iterations = 120};
  ClassifierOptions classifier;
  int policy_feature_count = 1024;  // recorded for downstream sampling
};

struct TrainedModel {
  HamiltonianGP hamiltonian;
  SwitchingClassifier classifier;
  std::uint64_t seed = 0;
  int policy_feature_count = 1024;

  // Stage diagnostics (deterministic; wall-clock is reported separately).
  std::vector<SurrogateDiagnostics> surrogate_diagnostics;
  std::vector<Eigen::Index> points_per_dim;
  double training_accuracy = 0.0;
};

/// Algorithm: surrogate time-GPs, gradient-of-H dataset, Hamiltonian GPs,
/// switching classifier — in that order, deterministically under `seed`.
/// Stage failures are rethrown with the stage name prefixed.
TrainedModel train(const TrajectoryDataset& dataset, const SphsStructure& structure,
                   const TrainConfig& config, std::uint64_t seed);

}  // namespace gpsphs
