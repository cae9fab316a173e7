#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpsphs/pathwise.hpp"
#include "gpsphs/pipeline.hpp"
#include "gpsphs/sphs.hpp"

namespace gpsphs {

/// Pathwise sample of the learned gradient field: one conditioned
/// Fourier-feature sample per state dimension. Deterministic per seed.
struct PathwiseSample {
  std::vector<PathwiseConditionedSample> dims;
  std::uint64_t seed = 0;
  int feature_count = 0;

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  GradientField gradient_field() const;
};

PathwiseSample sample_gradient_field(const HamiltonianGP& hgp, int feature_count,
                                     std::uint64_t seed);

enum class IntegratorKind { explicit_euler, rk4 };

struct IntegrateOptions {
  double dt = 1e-3;
  std::array<double, 2> t_span{0.0, 1.0};
  IntegratorKind integrator = IntegratorKind::explicit_euler;
};

using InputSignal = std::function<Eigen::VectorXd(double)>;
using SwitchingPolicyFn = std::function<int(const Eigen::VectorXd&)>;

InputSignal zero_input(int m);

/// One simulated trajectory with the energy reconstructed by line-integrating
/// the sampled gradient along the path (anchored at H(x0) = 0) and the
/// supply rate u^T y recorded per step.
struct Rollout {
  Eigen::VectorXd times;   // K+1
  Eigen::MatrixXd states;  // (K+1) x n
  std::vector<int> modes;  // K+1, policy evaluated at each stored state
  Eigen::VectorXd energy;  // K+1, energy[0] = 0
  Eigen::VectorXd supply;  // K+1, u^T y at each stored state
  double dt = 0.0;
};

/// Fixed-step integration of the switching dynamics; the mode is re-evaluated
/// from the policy at every step. Throws (with the step index and last finite
/// state) if the state leaves the finite range.
Rollout integrate(const SphsStructure& structure, const GradientField& grad,
                  const SwitchingPolicyFn& policy, const Eigen::VectorXd& x0,
                  const InputSignal& input, const IntegrateOptions& options);

struct EnsembleSample {
  int index = 0;
  std::uint64_t gradient_seed = 0;
  std::uint64_t policy_seed = 0;
  bool failed = false;
  std::string error;
  Rollout rollout;
};

/// Independent rollouts: per-sample seeds are derived from the master seed,
/// a gradient field and a switching policy are drawn per sample, and each
/// realization is integrated. Per-sample failures are recorded without
/// aborting the remaining samples.
std::vector<EnsembleSample> rollout_ensemble(const TrainedModel& model,
                                             const SphsStructure& structure,
                                             const Eigen::VectorXd& x0, const InputSignal& input,
                                             const IntegrateOptions& options, int n_samples,
                                             int feature_count, std::uint64_t master_seed);

struct PassivityAudit {
  int steps = 0;
  int violations = 0;
  double worst_margin = 0.0;  // max over steps of dH - supply*dt - eps (<= 0 when clean)
  double epsilon_constant = 0.0;
};

/// Checks the discrete passivity inequality dH_k <= supply_k dt + eps_k with
/// eps_k = c dt^2 max(1, |rhs_k|^2) for every step.
PassivityAudit passivity_audit(const Rollout& rollout, double epsilon_constant);

/// Estimates the audit constant c by running the same realization at dt and
/// dt/2 and bounding the worst positive margin against c dt^2 max(1,|rhs|^2).
/// A small floor covers pure floating-point round-off.
double calibrate_passivity_constant(const SphsStructure& structure, const GradientField& grad,
                                    const SwitchingPolicyFn& policy, const Eigen::VectorXd& x0,
                                    const InputSignal& input, const IntegrateOptions& options);

}  // namespace gpsphs
