#include "gpsphs/hopper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gpsphs/rng.hpp"

namespace gpsphs {

double HopperParams::spring_potential(double x1) const {
  const double e = x1 - rest_length;
  return 0.5 * stiffness * e * e + 0.25 * stiffness_cubic * e * e * e * e;
}

double HopperParams::spring_force_gradient(double x1) const {
  const double e = x1 - rest_length;
  return stiffness * e + stiffness_cubic * e * e * e;
}

namespace {

/// Combined matrix M(s) = J_s - R_s of the hopper, s in {0, 1}.
Eigen::Matrix3d hopper_combined(double s, double d) {
  Eigen::Matrix3d m;
  m << (s - 1.0) / d, 0.0, s,
       0.0, 0.0, 1.0,
       -s, -1.0, -s * d;
  return m;
}

double mode_to_s(int mode) { return mode == kHopperContact ? 1.0 : 0.0; }

}  // namespace

SphsStructure hopper_structure(const HopperParams& params) {
  const double d = params.damping;
  SphsStructure st;
  st.n = 3;
  st.m = 0;
  st.n_modes = 2;
  st.J = [d](int mode, const Eigen::VectorXd&) {
    const Eigen::Matrix3d m = hopper_combined(mode_to_s(mode), d);
    return Eigen::MatrixXd(0.5 * (m - m.transpose()));
  };
  st.R = [d](int mode, const Eigen::VectorXd&) {
    const Eigen::Matrix3d m = hopper_combined(mode_to_s(mode), d);
    return Eigen::MatrixXd(-0.5 * (m + m.transpose()));
  };
  st.G = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(3, 0); };
  return st;
}

GradientField hopper_true_hamiltonian(const HopperParams& params) {
  GradientField field;
  field.eval = [params](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(3);
    g[0] = params.spring_force_gradient(x[0]);
    g[1] = params.mass * params.gravity;
    g[2] = x[2] / params.mass;
    return g;
  };
  field.potential = [params](const Eigen::VectorXd& x) {
    return params.spring_potential(x[0]) + params.mass * params.gravity * x[1] +
           x[2] * x[2] / (2.0 * params.mass);
  };
  return field;
}

int hopper_mode_logic(const HopperParams& params, const Eigen::VectorXd& state,
                      int previous_mode) {
  if (previous_mode == kHopperFlight) {
    return state[1] - state[0] <= 0.0 ? kHopperContact : kHopperFlight;
  }
  return (state[0] >= params.rest_length && state[2] > 0.0) ? kHopperFlight : kHopperContact;
}

GroundTruthResult simulate_hopper_truth(const HopperParams& params, const Eigen::VectorXd& x0,
                                        std::array<double, 2> t_span, double fine_dt) {
  if (!(fine_dt > 0.0) || !(t_span[1] > t_span[0])) {
    throw std::invalid_argument("simulate_hopper_truth: invalid time grid");
  }
  const SphsStructure structure = hopper_structure(params);
  const GradientField grad = hopper_true_hamiltonian(params);
  const Eigen::VectorXd u0(0);

  const Eigen::Index steps =
      static_cast<Eigen::Index>(std::llround((t_span[1] - t_span[0]) / fine_dt));
  GroundTruthResult out;
  out.times.resize(steps + 1);
  out.states.resize(steps + 1, 3);
  out.modes.resize(static_cast<size_t>(steps + 1));

  Eigen::VectorXd x = x0;
  int mode = hopper_mode_logic(params, x, kHopperFlight);
  if (mode == kHopperContact) x[0] = x[1];  // start on the contact manifold

  for (Eigen::Index k = 0; k <= steps; ++k) {
    out.times[k] = t_span[0] + static_cast<double>(k) * fine_dt;
    out.states.row(k) = x;
    out.modes[static_cast<size_t>(k)] = mode;
    if (k == steps) break;

    const Eigen::VectorXd f = rhs(structure, grad, mode, x, u0);
    Eigen::VectorXd x_next = x + fine_dt * f;

    if (mode == kHopperFlight && x_next[1] - x_next[0] <= 0.0) {
      // Touchdown inside the step. The within-step flow is linear in tau, so
      // the crossing time solves (x2 - x1) + tau (f2 - f1) = 0 exactly.
      const double gap = x[1] - x[0];
      const double rate = f[1] - f[0];
      double tau = rate < 0.0 ? -gap / rate : 0.0;
      tau = std::clamp(tau, 0.0, fine_dt);
      Eigen::VectorXd x_hit = x + tau * f;
      x_hit[0] = x_hit[1];  // continuous state, foot exactly on the ground
      const Eigen::VectorXd f_contact =
          rhs(structure, grad, kHopperContact, x_hit, u0);
      x_next = x_hit + (fine_dt - tau) * f_contact;
      mode = kHopperContact;
    } else {
      const int next_mode = hopper_mode_logic(params, x_next, mode);
      mode = next_mode;
    }
    x = std::move(x_next);
  }
  return out;
}

GeneratedDataset generate_dataset(const HopperParams& params, const DatasetConfig& config,
                                  std::uint64_t seed) {
  if (config.n_trajectories < 1) {
    throw std::invalid_argument("generate_dataset: need at least one trajectory");
  }
  const double span = config.t_span[1] - config.t_span[0];
  const Eigen::Index per_traj =
      static_cast<Eigen::Index>(std::llround(span / config.sample_dt));  // half-open [t0, t1)
  const Eigen::Index stride =
      static_cast<Eigen::Index>(std::llround(config.sample_dt / config.fine_dt));
  if (stride < 1 || std::abs(stride * config.fine_dt - config.sample_dt) > 1e-12) {
    throw std::invalid_argument("generate_dataset: sample_dt must be a multiple of fine_dt");
  }

  const Eigen::Index total = per_traj * config.n_trajectories;
  GeneratedDataset out;
  out.data.times.resize(total);
  out.data.states.resize(total, 3);
  out.data.inputs.resize(total, 0);
  out.data.modes.resize(static_cast<size_t>(total));
  out.data.trajectory_ids.resize(static_cast<size_t>(total));
  out.noiseless_states.resize(total, 3);

  Rng x0_rng(derive_seed(seed, 1));
  for (int traj = 0; traj < config.n_trajectories; ++traj) {
    Eigen::VectorXd x0(3);
    do {
      x0[0] = x0_rng.uniform(0.0, 1.0);
      x0[1] = x0_rng.uniform(0.0, 2.0);
      x0[2] = x0_rng.uniform(-1.0, 1.0);
    } while (hopper_mode_logic(params, x0, kHopperFlight) != kHopperFlight);

    const GroundTruthResult truth =
        simulate_hopper_truth(params, x0, config.t_span, config.fine_dt);
    for (Eigen::Index i = 0; i < per_traj; ++i) {
      const Eigen::Index row = traj * per_traj + i;
      const Eigen::Index fine_idx = i * stride;
      out.data.times[row] = truth.times[fine_idx];
      out.noiseless_states.row(row) = truth.states.row(fine_idx);
      out.data.modes[static_cast<size_t>(row)] = truth.modes[static_cast<size_t>(fine_idx)];
      out.data.trajectory_ids[static_cast<size_t>(row)] = traj;
    }
  }

  // Per-dimension noise scaled to the requested SNR over the pooled signal.
  Rng noise_rng(derive_seed(seed, 2));
  out.data.states = out.noiseless_states;
  for (int j = 0; j < 3; ++j) {
    const double signal_power = out.noiseless_states.col(j).squaredNorm() /
                                static_cast<double>(total);
    const double snr = config.snr_db[static_cast<size_t>(j)];
    if (!std::isfinite(snr)) {
      out.realized_snr_db[static_cast<size_t>(j)] =
          std::numeric_limits<double>::infinity();
      continue;
    }
    const double noise_std = std::sqrt(signal_power * std::pow(10.0, -snr / 10.0));
    double noise_power = 0.0;
    for (Eigen::Index i = 0; i < total; ++i) {
      const double eta = noise_std * noise_rng.normal();
      out.data.states(i, j) += eta;
      noise_power += eta * eta;
    }
    noise_power /= static_cast<double>(total);
    out.realized_snr_db[static_cast<size_t>(j)] =
        10.0 * std::log10(signal_power / noise_power);
  }
  return out;
}

EvaluationMetrics evaluate(const TrainedModel& model, const HopperParams& params,
                           const EvaluateConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const SphsStructure structure = hopper_structure(params);

  EvaluationMetrics metrics;
  metrics.classifier_accuracy = model.classifier.training_accuracy();

  IntegrateOptions iopts;
  iopts.dt = config.dt;
  iopts.t_span = {0.0, config.horizon};
  const std::vector<EnsembleSample> ensemble =
      rollout_ensemble(model, structure, config.test_x0, zero_input(0), iopts,
                       config.n_samples, config.feature_count, config.seed);
  metrics.ensemble_size = config.n_samples;

  // Ground truth on the same grid for the squared-error comparison.
  const GroundTruthResult truth =
      simulate_hopper_truth(params, config.test_x0, {0.0, config.horizon}, config.fine_dt);
  const Eigen::Index stride =
      static_cast<Eigen::Index>(std::llround(config.dt / config.fine_dt));
  if (stride < 1 || std::abs(stride * config.fine_dt - config.dt) > 1e-12) {
    throw std::invalid_argument("evaluate: dt must be a multiple of fine_dt");
  }

  // Audit budget calibrated once by step-halving on the first successful sample.
  bool have_constant = false;
  double squared_error = 0.0;
  Eigen::Index error_terms = 0;
  metrics.audit_worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& sample : ensemble) {
    if (sample.failed) {
      ++metrics.failed_samples;
      continue;
    }
    const Rollout& r = sample.rollout;
    if (!have_constant) {
      const PathwiseSample grad_sample = sample_gradient_field(
          model.hamiltonian, config.feature_count, sample.gradient_seed);
      const SwitchingPolicySample policy = sample_switching_policy(
          model.classifier, config.feature_count, sample.policy_seed);
      const GradientField grad = grad_sample.gradient_field();
      metrics.audit_epsilon_constant = calibrate_passivity_constant(
          structure, grad, [&policy](const Eigen::VectorXd& x) { return policy(x); },
          config.test_x0, zero_input(0), iopts);
      have_constant = true;
    }
    const PassivityAudit audit = passivity_audit(r, metrics.audit_epsilon_constant);
    metrics.audit_violations += audit.violations;
    metrics.audit_worst_margin = std::max(metrics.audit_worst_margin, audit.worst_margin);

    for (Eigen::Index k = 0; k < r.times.size(); ++k) {
      const Eigen::VectorXd truth_state = truth.states.row(k * stride);
      squared_error += (r.states.row(k).transpose() - truth_state).squaredNorm();
      error_terms += 3;
    }
  }
  metrics.trajectory_mse = error_terms > 0 ? squared_error / static_cast<double>(error_terms)
                                           : std::numeric_limits<double>::quiet_NaN();
  metrics.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

}  // namespace gpsphs
