#include "gpsphs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gpsphs/rng.hpp"

namespace gpsphs {

Eigen::VectorXd PathwiseSample::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(dims.size()));
  for (size_t j = 0; j < dims.size(); ++j) {
    g[static_cast<Eigen::Index>(j)] = dims[j].eval(x);
  }
  return g;
}

GradientField PathwiseSample::gradient_field() const {
  PathwiseSample copy = *this;
  GradientField field;
  field.eval = [copy](const Eigen::VectorXd& x) { return copy.eval(x); };
  return field;
}

PathwiseSample sample_gradient_field(const HamiltonianGP& hgp, int feature_count,
                                     std::uint64_t seed) {
  if (feature_count < 1) {
    throw std::invalid_argument("sample_gradient_field: feature_count must be >= 1");
  }
  PathwiseSample sample;
  sample.seed = seed;
  sample.feature_count = feature_count;
  for (size_t j = 0; j < hgp.dims.size(); ++j) {
    const GpModel& model = hgp.dims[j];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    sample.dims.push_back(draw_conditioned_sample(model.inputs, model.targets, model.noise,
                                                  model.jitter, model.chol, model.params,
                                                  feature_count, rng));
  }
  return sample;
}

InputSignal zero_input(int m) {
  return [m](double) { return Eigen::VectorXd::Zero(m); };
}

Rollout integrate(const SphsStructure& structure, const GradientField& grad,
                  const SwitchingPolicyFn& policy, const Eigen::VectorXd& x0,
                  const InputSignal& input, const IntegrateOptions& options) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(options.t_span[1] > options.t_span[0]) || !std::isfinite(options.t_span[0]) ||
      !std::isfinite(options.t_span[1])) {
    throw std::invalid_argument("integrate: invalid t_span");
  }
  if (!x0.allFinite()) throw std::invalid_argument("integrate: non-finite initial state");
  if (x0.size() != structure.n) throw std::invalid_argument("integrate: x0 dimension mismatch");

  const double dt = options.dt;
  const Eigen::Index steps = static_cast<Eigen::Index>(
      std::llround((options.t_span[1] - options.t_span[0]) / dt));

  Rollout out;
  out.dt = dt;
  out.times.resize(steps + 1);
  out.states.resize(steps + 1, structure.n);
  out.modes.resize(static_cast<size_t>(steps + 1));
  out.energy.resize(steps + 1);
  out.supply.resize(steps + 1);

  Eigen::VectorXd x = x0;
  double energy = 0.0;
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double t = options.t_span[0] + static_cast<double>(k) * dt;
    const int mode = policy(x);
    structure.check_mode(mode);
    const Eigen::VectorXd u = input(t);
    const Eigen::VectorXd g = grad.eval(x);  // shared by rhs, supply, and energy

    out.times[k] = t;
    out.states.row(k) = x;
    out.modes[static_cast<size_t>(k)] = mode;
    out.energy[k] = energy;
    out.supply[k] =
        structure.m > 0 ? u.dot(structure.G(x).transpose() * g) : 0.0;
    if (k == steps) break;

    Eigen::VectorXd x_next;
    if (options.integrator == IntegratorKind::explicit_euler) {
      Eigen::VectorXd f = (structure.J(mode, x) - structure.R(mode, x)) * g;
      if (structure.m > 0) f += structure.G(x) * u;
      x_next = x + dt * f;
    } else {
      // Classical RK4 with the mode frozen over the substeps.
      Eigen::VectorXd k1 = (structure.J(mode, x) - structure.R(mode, x)) * g;
      if (structure.m > 0) k1 += structure.G(x) * u;
      const Eigen::VectorXd k2 =
          rhs(structure, grad, mode, x + 0.5 * dt * k1, input(t + 0.5 * dt));
      const Eigen::VectorXd k3 =
          rhs(structure, grad, mode, x + 0.5 * dt * k2, input(t + 0.5 * dt));
      const Eigen::VectorXd k4 = rhs(structure, grad, mode, x + dt * k3, input(t + dt));
      x_next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!x_next.allFinite()) {
      std::ostringstream os;
      os << "integrate: non-finite state at step " << k + 1 << " (t = " << t + dt
         << "), last finite state [" << x.transpose() << "]";
      throw std::runtime_error(os.str());
    }
    // First-order line integral of the sampled gradient along the step.
    energy += g.dot(x_next - x);
    x = std::move(x_next);
  }
  return out;
}

std::vector<EnsembleSample> rollout_ensemble(const TrainedModel& model,
                                             const SphsStructure& structure,
                                             const Eigen::VectorXd& x0, const InputSignal& input,
                                             const IntegrateOptions& options, int n_samples,
                                             int feature_count, std::uint64_t master_seed) {
  if (n_samples < 1) throw std::invalid_argument("rollout_ensemble: n_samples must be >= 1");
  std::vector<EnsembleSample> samples;
  samples.reserve(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    EnsembleSample s;
    s.index = i;
    s.gradient_seed = derive_seed(master_seed, 2 * static_cast<std::uint64_t>(i));
    s.policy_seed = derive_seed(master_seed, 2 * static_cast<std::uint64_t>(i) + 1);
    try {
      const PathwiseSample grad_sample =
          sample_gradient_field(model.hamiltonian, feature_count, s.gradient_seed);
      const SwitchingPolicySample policy =
          sample_switching_policy(model.classifier, feature_count, s.policy_seed);
      const GradientField grad = grad_sample.gradient_field();
      s.rollout = integrate(
          structure, grad, [&policy](const Eigen::VectorXd& x) { return policy(x); }, x0,
          input, options);
    } catch (const std::exception& e) {
      s.failed = true;
      s.error = e.what();
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

PassivityAudit passivity_audit(const Rollout& rollout, double epsilon_constant) {
  PassivityAudit audit;
  audit.epsilon_constant = epsilon_constant;
  const Eigen::Index steps = rollout.times.size() - 1;
  audit.steps = static_cast<int>(steps);
  audit.worst_margin = -std::numeric_limits<double>::infinity();
  const double dt = rollout.dt;
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double dh = rollout.energy[k + 1] - rollout.energy[k];
    const Eigen::VectorXd slope = (rollout.states.row(k + 1) - rollout.states.row(k)) / dt;
    const double eps =
        epsilon_constant * dt * dt * std::max(1.0, slope.squaredNorm());
    const double margin = dh - rollout.supply[k] * dt - eps;
    audit.worst_margin = std::max(audit.worst_margin, margin);
    if (margin > 0.0) ++audit.violations;
  }
  return audit;
}

double calibrate_passivity_constant(const SphsStructure& structure, const GradientField& grad,
                                    const SwitchingPolicyFn& policy, const Eigen::VectorXd& x0,
                                    const InputSignal& input, const IntegrateOptions& options) {
  double constant = 0.0;
  for (int half = 0; half < 2; ++half) {
    IntegrateOptions opts = options;
    opts.dt = half == 0 ? options.dt : 0.5 * options.dt;
    const Rollout r = integrate(structure, grad, policy, x0, input, opts);
    const Eigen::Index steps = r.times.size() - 1;
    for (Eigen::Index k = 0; k < steps; ++k) {
      const double dh = r.energy[k + 1] - r.energy[k];
      const Eigen::VectorXd slope = (r.states.row(k + 1) - r.states.row(k)) / opts.dt;
      const double excess = dh - r.supply[k] * opts.dt;
      if (excess > 0.0) {
        constant = std::max(
            constant, excess / (opts.dt * opts.dt * std::max(1.0, slope.squaredNorm())));
      }
    }
  }
  // Safety factor for the unaudited grid plus a floor for pure round-off.
  return 4.0 * constant + 1e-9;
}

}  // namespace gpsphs
