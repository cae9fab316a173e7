#include "gpsphs/gp_regression.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gpsphs/rng.hpp"

namespace gpsphs {

namespace {

double clamp_variance(double v, double prior_variance) {
  if (v >= 0.0) return v;
  // Round-off clamp, scaled so large-signal models are not rejected.
  if (v >= -1e-9 * std::max(1.0, prior_variance)) return 0.0;
  std::ostringstream os;
  os << "posterior variance " << v << " below round-off clamp";
  throw std::runtime_error(os.str());
}

Eigen::VectorXd broadcast_noise(const Eigen::VectorXd& noise, Eigen::Index n) {
  if (noise.size() == n) return noise;
  if (noise.size() == 1) return Eigen::VectorXd::Constant(n, noise[0]);
  std::ostringstream os;
  os << "noise vector length " << noise.size() << " does not match N = " << n;
  throw std::invalid_argument(os.str());
}

}  // namespace

NoiseSpec NoiseSpec::fixed_value(double variance) {
  NoiseSpec s;
  s.kind = Kind::fixed;
  s.fixed = Eigen::VectorXd::Constant(1, variance);
  return s;
}

NoiseSpec NoiseSpec::fixed_vector(Eigen::VectorXd variances) {
  NoiseSpec s;
  s.kind = Kind::fixed;
  s.fixed = std::move(variances);
  return s;
}

GpModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
            const Eigen::VectorXd& noise, const KernelParams& params) {
  params.validate();
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument("fit: inputs/targets row mismatch");
  }
  if (inputs.rows() > 0 && inputs.cols() != params.input_dim()) {
    throw std::invalid_argument("fit: input dimension does not match kernel parameters");
  }

  GpModel model;
  model.inputs = inputs;
  model.targets = targets;
  model.params = params;
  if (inputs.rows() == 0) {
    model.noise = Eigen::VectorXd();
    model.alpha = Eigen::VectorXd();
    return model;  // prior-only model
  }
  model.noise = broadcast_noise(noise, inputs.rows());

  GramMatrix g = gram(inputs, params, model.noise);
  model.jitter = g.jitter;
  model.chol = std::move(g.chol);
  model.alpha = model.chol.solve(targets);
  return model;
}

PosteriorGaussian GpModel::posterior(const Eigen::VectorXd& x) const {
  if (x.size() != params.input_dim()) {
    throw std::invalid_argument("posterior: query dimension mismatch");
  }
  const double prior_var = params.signal_std * params.signal_std;
  if (size() == 0) {
    return {0.0, prior_var};
  }
  const Eigen::VectorXd k = se_kernel_vector(x, inputs, params);
  const Eigen::VectorXd w = chol.solve(k);
  PosteriorGaussian p;
  p.mean = k.dot(alpha);
  p.variance = clamp_variance(prior_var - k.dot(w), prior_var);
  return p;
}

PosteriorGaussian GpModel::posterior_derivative(double t) const {
  if (params.input_dim() != 1) {
    throw std::invalid_argument("posterior_derivative: requires 1-D inputs");
  }
  const double prior_var = se_kernel_d12(t, t, params);
  if (size() == 0) {
    return {0.0, prior_var};
  }
  const Eigen::VectorXd k1 = se_kernel_d1_vector(t, inputs, params);
  const Eigen::VectorXd w = chol.solve(k1);
  PosteriorGaussian p;
  p.mean = k1.dot(alpha);
  p.variance = clamp_variance(prior_var - k1.dot(w), prior_var);
  return p;
}

namespace {

struct UnpackedParams {
  KernelParams kernel;
  double learned_noise = 0.0;  // variance, when learned
};

UnpackedParams unpack(const Eigen::VectorXd& log_params, Eigen::Index input_dim,
                      const NoiseSpec& noise_spec) {
  const Eigen::Index expected =
      1 + input_dim + (noise_spec.kind == NoiseSpec::Kind::learn ? 1 : 0);
  if (log_params.size() != expected) {
    std::ostringstream os;
    os << "log_params length " << log_params.size() << ", expected " << expected;
    throw std::invalid_argument(os.str());
  }
  UnpackedParams u;
  u.kernel.signal_std = std::exp(log_params[0]);
  u.kernel.lengthscale_diag = log_params.segment(1, input_dim).array().exp();
  if (noise_spec.kind == NoiseSpec::Kind::learn) {
    u.learned_noise = std::exp(log_params[1 + input_dim]);
  }
  return u;
}

}  // namespace

NlmlResult nlml(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                const NoiseSpec& noise_spec, const Eigen::VectorXd& log_params,
                bool want_gradient) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  if (n == 0) throw std::invalid_argument("nlml: empty dataset");
  if (targets.size() != n) throw std::invalid_argument("nlml: inputs/targets mismatch");

  const UnpackedParams u = unpack(log_params, d, noise_spec);
  const KernelParams& kp = u.kernel;
  const double jit = base_jitter(kp);

  Eigen::VectorXd noise_vec;
  if (noise_spec.kind == NoiseSpec::Kind::learn) {
    noise_vec = Eigen::VectorXd::Constant(n, u.learned_noise);
  } else {
    noise_vec = broadcast_noise(noise_spec.fixed, n);
  }

  Eigen::MatrixXd k_se = se_kernel_matrix(inputs, kp);
  Eigen::MatrixXd k = k_se;
  k.diagonal() += noise_vec;
  k.diagonal().array() += jit;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  NlmlResult result;
  if (llt.info() != Eigen::Success) {
    result.value = std::numeric_limits<double>::infinity();
    return result;  // inadmissible point; optimizer rejects the step
  }

  const Eigen::VectorXd alpha = llt.solve(targets);
  const double log_det =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  result.value = 0.5 * targets.dot(alpha) + 0.5 * log_det +
                 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);

  if (!want_gradient) return result;

  // d NLML / d theta = 1/2 tr((K^{-1} - alpha alpha^T) dK/dtheta).
  const Eigen::MatrixXd k_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd inner = k_inv - alpha * alpha.transpose();

  result.gradient.resize(log_params.size());
  {
    // dK/d log sf = 2 (K_se + jitter I); the jitter tracks signal_std^2.
    Eigen::MatrixXd dk = 2.0 * k_se;
    dk.diagonal().array() += 2.0 * jit;
    result.gradient[0] = 0.5 * inner.cwiseProduct(dk).sum();
  }
  for (Eigen::Index p = 0; p < d; ++p) {
    // dK_ij / d log lambda_p = -lambda_p (x_ip - x_jp)^2 K_se,ij.
    const double lam = kp.lengthscale_diag[p];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double diff = inputs(i, p) - inputs(j, p);
        acc += inner(i, j) * (-lam * diff * diff * k_se(i, j));
      }
    }
    result.gradient[1 + p] = 0.5 * acc;
  }
  if (noise_spec.kind == NoiseSpec::Kind::learn) {
    // dK/d log sigma_n^2 = sigma_n^2 I.
    result.gradient[1 + d] = 0.5 * u.learned_noise * inner.trace();
  }
  return result;
}

OptimizeResult optimize_hyperparams(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                    const NoiseSpec& noise_spec, const OptimizeOptions& options,
                                    std::uint64_t seed) {
  if (options.restarts < 1) {
    throw std::invalid_argument("optimize_hyperparams: restarts must be >= 1");
  }
  const Eigen::Index d = inputs.cols();
  const Eigen::Index n_params =
      1 + d + (noise_spec.kind == NoiseSpec::Kind::learn ? 1 : 0);

  Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    NlmlResult r = nlml(inputs, targets, noise_spec, x, grad != nullptr);
    if (grad != nullptr && std::isfinite(r.value)) *grad = r.gradient;
    return r.value;
  };

  MinimizeOptions mopts;
  mopts.max_iterations = options.max_iterations;
  mopts.gradient_tolerance = options.gradient_tolerance;
  mopts.record_trace = options.record_trace;

  Rng rng(seed);
  OptimizeResult best;
  bool have_best = false;
  std::vector<std::string> failures;
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd x0(n_params);
    for (Eigen::Index i = 0; i < n_params; ++i) {
      x0[i] = std::log(rng.log_uniform(options.init_low, options.init_high));
    }
    try {
      MinimizeResult m = minimize_gradient_descent(objective, x0, mopts);
      if (!have_best || m.value < best.nlml) {
        const UnpackedParams u = unpack(m.x, d, noise_spec);
        best.params = u.kernel;
        if (noise_spec.kind == NoiseSpec::Kind::learn) {
          best.noise = Eigen::VectorXd::Constant(inputs.rows(), u.learned_noise);
        } else {
          best.noise = broadcast_noise(noise_spec.fixed, inputs.rows());
        }
        best.nlml = m.value;
        best.gradient_norm = m.gradient_norm;
        best.iterations = m.iterations;
        best.converged = m.converged;
        best.best_restart = r;
        best.trace = std::move(m.trace);
        have_best = true;
      }
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "restart " << r << ": " << e.what();
      failures.push_back(os.str());
    }
  }
  if (!have_best) {
    std::ostringstream os;
    os << "optimize_hyperparams: all " << options.restarts << " restarts failed:";
    for (const auto& f : failures) os << "\n  " << f;
    throw std::runtime_error(os.str());
  }
  return best;
}

}  // namespace gpsphs
