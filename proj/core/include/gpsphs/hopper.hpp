#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "gpsphs/pipeline.hpp"
#include "gpsphs/simulate.hpp"
#include "gpsphs/sphs.hpp"

namespace gpsphs {

/// Vertical hopper plant: state (x1 spring length [m], x2 body height [m],
/// x3 body momentum [kg m/s]); mode 1 = flight (s = 0), mode 2 = ground
/// contact (s = 1). Spring potential V(x1) = k/2 (x1-r)^2 + k_nl/4 (x1-r)^4.
///
/// The spring constants are calibrated so a drop from 1.5 m produces several
/// decaying hops and settles into contact within 5 s.
struct HopperParams {
  double mass = 1.0;        // kg
  double damping = 2.0;     // dimensionless d in the structure matrices
  double gravity = 9.81;    // m/s^2
  double rest_length = 0.7; // m
  double stiffness = 60.0;  // N/m
  double stiffness_cubic = 200.0;  // N/m^3

  double spring_potential(double x1) const;
  double spring_force_gradient(double x1) const;  // dV/dx1
};

constexpr int kHopperFlight = 1;   // s = 0
constexpr int kHopperContact = 2;  // s = 1

/// Structure with the combined matrix [[(s-1)/d, 0, s], [0, 0, 1],
/// [-s, -1, -s d]] split into its skew part J_s and dissipation
/// R_s = diag((1-s)/d, 0, s d); G is empty (no external ports).
SphsStructure hopper_structure(const HopperParams& params = {});

/// H(x) = x3^2 / (2m) + m g x2 + V(x1), with the analytic gradient.
GradientField hopper_true_hamiltonian(const HopperParams& params = {});

/// Hysteresis event logic of the real plant: flight -> contact when the foot
/// reaches the ground (x2 - x1 <= 0); contact -> flight when the spring
/// passes its rest length moving upward (x1 >= r and x3 > 0).
int hopper_mode_logic(const HopperParams& params, const Eigen::VectorXd& state,
                      int previous_mode);

struct GroundTruthResult {
  Eigen::VectorXd times;   // fine grid
  Eigen::MatrixXd states;  // fine grid x 3
  std::vector<int> modes;  // per grid point
};

/// Fine-step explicit Euler with the touchdown instant located inside the
/// step (the within-step flow is linear) and x1 = x2 enforced at the switch,
/// so the state stays continuous and contact keeps x1 = x2 exactly.
GroundTruthResult simulate_hopper_truth(const HopperParams& params, const Eigen::VectorXd& x0,
                                        std::array<double, 2> t_span, double fine_dt);

struct DatasetConfig {
  int n_trajectories = 20;
  std::array<double, 2> t_span{0.0, 5.0};
  double sample_dt = 0.1;             // half-open sampling over [t0, t1)
  std::array<double, 3> snr_db{39.0, 34.0, 18.0};
  double fine_dt = 1e-4;
};

struct GeneratedDataset {
  TrajectoryDataset data;             // noisy measurements + true mode labels
  Eigen::MatrixXd noiseless_states;   // same rows, before noise injection
  std::array<double, 3> realized_snr_db{};
};

/// Draws initial states uniformly over [0,1] x [0,2] x [-1,1] (redrawn until
/// the initial mode is flight), simulates the plant, samples every sample_dt,
/// and injects per-dimension Gaussian noise scaled to the requested SNR over
/// the pooled dataset. Mode labels are noise-free.
GeneratedDataset generate_dataset(const HopperParams& params, const DatasetConfig& config,
                                  std::uint64_t seed);

struct EvaluateConfig {
  Eigen::Vector3d test_x0{0.7, 0.85, 0.0};
  double horizon = 3.0;
  double dt = 1e-3;
  int n_samples = 3;
  int feature_count = 1024;
  double fine_dt = 1e-4;
  std::uint64_t seed = 0;
};

struct EvaluationMetrics {
  double classifier_accuracy = 0.0;
  double trajectory_mse = 0.0;
  int ensemble_size = 0;
  int failed_samples = 0;
  int audit_violations = 0;
  double audit_worst_margin = 0.0;
  double audit_epsilon_constant = 0.0;
  double wall_clock_seconds = 0.0;
};

/// Benchmark metrics: training-set classifier accuracy, mean squared error of
/// a sampled ensemble against the true plant from an unseen initial state,
/// and passivity audits of every rollout.
EvaluationMetrics evaluate(const TrainedModel& model, const HopperParams& params,
                           const EvaluateConfig& config);

}  // namespace gpsphs
