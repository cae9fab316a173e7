#include "gpsphs/gp_classification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gpsphs {

namespace {

constexpr double kWFloor = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log sigmoid(z), stable for large |z|.
double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += log_sigmoid(y[i] * f[i]);
  return acc;
}

struct LaplaceState {
  Eigen::VectorXd f;  // latent mode iterate
  Eigen::VectorXd a;  // K^{-1} f for iterates of the form f = K a
  Eigen::VectorXd w;
  Eigen::VectorXd grad;  // (y+1)/2 - pi
  double objective = 0.0;
  double evidence = 0.0;
  int iterations = 0;
};

/// Newton mode finding for the binary Laplace approximation with logistic
/// likelihood, in the numerically stable B = I + W^1/2 K W^1/2 form. A step
/// is halved until the objective Psi(f) = log p(y|f) - f^T K^{-1} f / 2 does
/// not decrease; a decrease that survives damping raises an error carrying
/// the objective trace.
LaplaceState laplace_mode(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                          const Eigen::VectorXd* warm_start_f, int max_iterations,
                          double tolerance) {
  const Eigen::Index n = y.size();
  LaplaceState st;
  std::vector<double> trace;

  bool objective_valid = false;
  if (warm_start_f != nullptr && warm_start_f->size() == n) {
    st.f = *warm_start_f;
    st.a.setZero(n);  // consistent pair established after the first full step
  } else {
    st.f = Eigen::VectorXd::Zero(n);
    st.a = Eigen::VectorXd::Zero(n);
    st.objective = log_likelihood(y, st.f);
    objective_valid = true;
    trace.push_back(st.objective);
  }

  Eigen::LLT<Eigen::MatrixXd> b_chol;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    Eigen::VectorXd pi(n), w(n), g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      pi[i] = sigmoid(st.f[i]);
      w[i] = std::max(pi[i] * (1.0 - pi[i]), kWFloor);
      g[i] = 0.5 * (y[i] + 1.0) - pi[i];
    }
    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXd b = sw.asDiagonal() * k * sw.asDiagonal();
    b.diagonal().array() += 1.0;
    b_chol.compute(b);
    if (b_chol.info() != Eigen::Success) {
      throw std::runtime_error("laplace_mode: Cholesky of B failed");
    }
    const Eigen::VectorXd bvec = w.cwiseProduct(st.f) + g;
    const Eigen::VectorXd a_new =
        bvec - sw.cwiseProduct(b_chol.solve(sw.cwiseProduct(k * bvec)));
    const Eigen::VectorXd f_new = k * a_new;

    Eigen::VectorXd a_next = a_new;
    Eigen::VectorXd f_next = f_new;
    double obj_next = -0.5 * a_next.dot(f_next) + log_likelihood(y, f_next);
    if (objective_valid) {
      double t = 1.0;
      while (obj_next < st.objective - 1e-12 * (1.0 + std::abs(st.objective)) && t > 1e-4) {
        t *= 0.5;
        a_next = st.a + t * (a_new - st.a);
        f_next = k * a_next;
        obj_next = -0.5 * a_next.dot(f_next) + log_likelihood(y, f_next);
      }
      if (obj_next < st.objective - 1e-9 * (1.0 + std::abs(st.objective))) {
        std::ostringstream os;
        os << "laplace_mode: Newton diverged, objective trace:";
        for (double v : trace) os << " " << v;
        os << " -> " << obj_next;
        throw std::runtime_error(os.str());
      }
    }

    const double delta = (f_next - st.f).lpNorm<Eigen::Infinity>();
    st.f = std::move(f_next);
    st.a = std::move(a_next);
    st.objective = obj_next;
    objective_valid = true;
    trace.push_back(st.objective);
    if (delta <= tolerance) {
      ++iter;
      break;
    }
  }
  st.iterations = iter;

  // Recompute curvature terms at the mode and assemble the evidence.
  Eigen::VectorXd pi(n);
  st.w.resize(n);
  st.grad.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pi[i] = sigmoid(st.f[i]);
    st.w[i] = std::max(pi[i] * (1.0 - pi[i]), kWFloor);
    st.grad[i] = 0.5 * (y[i] + 1.0) - pi[i];
  }
  const Eigen::VectorXd sw = st.w.cwiseSqrt();
  Eigen::MatrixXd b = sw.asDiagonal() * k * sw.asDiagonal();
  b.diagonal().array() += 1.0;
  b_chol.compute(b);
  if (b_chol.info() != Eigen::Success) {
    throw std::runtime_error("laplace_mode: Cholesky of B failed at the mode");
  }
  const double half_log_det_b =
      b_chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
  st.evidence = st.objective - half_log_det_b;
  return st;
}

}  // namespace

void SwitchingClassifier::rebuild(const ClassifierOptions& options) {
  for (auto& cls : classes) {
    GramMatrix prior = gram(inputs, cls.params, Eigen::VectorXd::Zero(1));
    LaplaceState st = laplace_mode(prior.entries, cls.labels, nullptr,
                                   options.newton_max_iterations, options.newton_tolerance);
    const double grad_norm = (st.grad - st.a).lpNorm<Eigen::Infinity>();
    if (grad_norm > 1e-6) {
      std::ostringstream os;
      os << "classifier mode " << cls.mode_id << ": Laplace objective gradient " << grad_norm
         << " > 1e-6 after " << st.iterations << " Newton iterations";
      throw std::runtime_error(os.str());
    }
    cls.latent_mode = st.f;
    cls.w_diag = st.w;
    cls.grad_loglik = st.grad;
    cls.evidence = st.evidence;
    cls.newton_iterations = st.iterations;
    cls.sqrt_w = st.w.cwiseSqrt();

    Eigen::MatrixXd b = cls.sqrt_w.asDiagonal() * prior.entries * cls.sqrt_w.asDiagonal();
    b.diagonal().array() += 1.0;
    cls.b_chol.compute(b);

    // Matheron machinery: the Laplace posterior equals exact GP regression on
    // pseudo-targets f_hat + W^-1 grad with heteroscedastic noise W^-1.
    GramMatrix matheron = gram(inputs, cls.params, cls.w_diag.cwiseInverse());
    cls.matheron_chol = std::move(matheron.chol);
    cls.matheron_jitter = matheron.jitter;
  }
}

SwitchingClassifier train_classifier(const Eigen::MatrixXd& states, const std::vector<int>& modes,
                                     const ClassifierOptions& options, std::uint64_t seed) {
  const Eigen::Index n = states.rows();
  if (n == 0 || static_cast<Eigen::Index>(modes.size()) != n) {
    throw std::invalid_argument("train_classifier: states/modes size mismatch");
  }
  std::set<int> distinct(modes.begin(), modes.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("train_classifier: degenerate labels (single mode in dataset)");
  }
  const int n_modes = *distinct.rbegin();
  if (*distinct.begin() < 1) {
    throw std::invalid_argument("train_classifier: mode ids must be >= 1");
  }
  for (int c = 1; c <= n_modes; ++c) {
    if (distinct.find(c) == distinct.end()) {
      std::ostringstream os;
      os << "train_classifier: degenerate labels (mode " << c << " has no examples)";
      throw std::invalid_argument(os.str());
    }
  }

  SwitchingClassifier clf;
  clf.inputs = states;
  clf.modes = modes;
  clf.n_modes = n_modes;

  auto labels_for = [&](int mode_id) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = modes[i] == mode_id ? 1.0 : -1.0;
    return y;
  };

  auto train_class = [&](int mode_id) {
    LaplaceClass cls;
    cls.mode_id = mode_id;
    cls.labels = labels_for(mode_id);

    // Negative Laplace evidence as a function of the packed log-parameters,
    // warm-starting Newton from the latest successful mode.
    Eigen::VectorXd warm;
    auto evidence_at = [&](const Eigen::VectorXd& log_params) {
      KernelParams kp;
      kp.signal_std = std::exp(log_params[0]);
      kp.lengthscale_diag = log_params.tail(states.cols()).array().exp();
      GramMatrix prior = gram(states, kp, Eigen::VectorXd::Zero(1));
      LaplaceState st =
          laplace_mode(prior.entries, cls.labels, warm.size() == n ? &warm : nullptr,
                       options.newton_max_iterations, options.newton_tolerance);
      warm = st.f;
      return -st.evidence;
    };
    auto penalized = [&](const Eigen::VectorXd& x) {
      double value = evidence_at(x);
      if (options.hyperprior_log_scale > 0.0) {
        const double tau2 =
            options.hyperprior_log_scale * options.hyperprior_log_scale;
        value += 0.5 * x.squaredNorm() / tau2;
      }
      return value;
    };
    Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      double value;
      try {
        value = penalized(x);
      } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
      }
      if (grad != nullptr) {
        grad->resize(x.size());
        for (Eigen::Index p = 0; p < x.size(); ++p) {
          Eigen::VectorXd xp = x, xm = x;
          xp[p] += options.fd_step;
          xm[p] -= options.fd_step;
          double vp, vm;
          try {
            vp = penalized(xp);
            vm = penalized(xm);
          } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
          }
          (*grad)[p] = (vp - vm) / (2.0 * options.fd_step);
        }
      }
      return value;
    };

    MinimizeOptions mopts;
    mopts.max_iterations = options.optimize.max_iterations;
    mopts.gradient_tolerance = options.optimize.gradient_tolerance;

    // All classes share the optimization seed, which makes the trained
    // probabilities equivariant under mode-id permutations.
    Rng rng(seed);
    bool have_best = false;
    double best_value = 0.0;
    Eigen::VectorXd best_x;
    std::vector<std::string> failures;
    for (int r = 0; r < options.optimize.restarts; ++r) {
      Eigen::VectorXd x0(1 + states.cols());
      for (Eigen::Index i = 0; i < x0.size(); ++i) {
        x0[i] = std::log(rng.log_uniform(options.optimize.init_low, options.optimize.init_high));
      }
      try {
        warm.resize(0);
        MinimizeResult m = minimize_gradient_descent(objective, x0, mopts);
        if (!have_best || m.value < best_value) {
          best_value = m.value;
          best_x = m.x;
          have_best = true;
        }
      } catch (const std::exception& e) {
        failures.push_back(e.what());
      }
    }
    if (!have_best) {
      std::ostringstream os;
      os << "train_classifier: all restarts failed for mode " << mode_id << ":";
      for (const auto& f : failures) os << "\n  " << f;
      throw std::runtime_error(os.str());
    }
    cls.params.signal_std = std::exp(best_x[0]);
    cls.params.lengthscale_diag = best_x.tail(states.cols()).array().exp();
    return cls;
  };

  clf.classes.push_back(train_class(1));
  if (n_modes == 2) {
    // Exact label-flip mirror: the logistic evidence is invariant under
    // y -> -y with f -> -f, so retraining mode 2 with the shared seed would
    // land on the same hyperparameters.
    LaplaceClass mirror;
    mirror.mode_id = 2;
    mirror.labels = -clf.classes[0].labels;
    mirror.params = clf.classes[0].params;
    clf.classes.push_back(std::move(mirror));
  } else {
    for (int c = 2; c <= n_modes; ++c) clf.classes.push_back(train_class(c));
  }

  clf.rebuild(options);
  return clf;
}

Eigen::VectorXd SwitchingClassifier::predict_mode_probability(const Eigen::VectorXd& x) const {
  if (x.size() != inputs.cols()) {
    throw std::invalid_argument("predict_mode_probability: query dimension mismatch");
  }
  Eigen::VectorXd probs(static_cast<Eigen::Index>(classes.size()));
  for (size_t c = 0; c < classes.size(); ++c) {
    const LaplaceClass& cls = classes[c];
    const Eigen::VectorXd k_star = se_kernel_vector(x, inputs, cls.params);
    const double mean = k_star.dot(cls.grad_loglik);
    const Eigen::VectorXd v =
        cls.b_chol.matrixL().solve(cls.sqrt_w.cwiseProduct(k_star));
    const double prior_var = cls.params.signal_std * cls.params.signal_std;
    const double var = std::max(prior_var - v.squaredNorm(), 0.0);
    // Probit-form approximation of the logistic-Gaussian integral.
    probs[static_cast<Eigen::Index>(c)] = sigmoid(mean / std::sqrt(1.0 + M_PI * var / 8.0));
  }
  const double total = probs.sum();
  if (total <= 0.0) {
    return Eigen::VectorXd::Constant(probs.size(), 1.0 / static_cast<double>(probs.size()));
  }
  return probs / total;
}

int SwitchingClassifier::predict_mode(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd probs = predict_mode_probability(x);
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return classes[static_cast<size_t>(best)].mode_id;
}

double SwitchingClassifier::training_accuracy() const {
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    if (predict_mode(inputs.row(i)) == modes[static_cast<size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.rows());
}

int SwitchingPolicySample::operator()(const Eigen::VectorXd& x) const {
  double best = -std::numeric_limits<double>::infinity();
  int best_mode = 0;
  bool tie = false;
  for (size_t c = 0; c < latents.size(); ++c) {
    const double v = latents[c].eval(x);
    if (v > best) {
      best = v;
      best_mode = static_cast<int>(c) + 1;
      tie = false;
    } else if (v == best) {
      tie = true;  // keep the lowest mode id
    }
  }
  if (tie) ++ties_;
  return best_mode;
}

Eigen::VectorXd SwitchingPolicySample::latent_values(const Eigen::VectorXd& x) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(latents.size()));
  for (size_t c = 0; c < latents.size(); ++c) {
    v[static_cast<Eigen::Index>(c)] = latents[c].eval(x);
  }
  return v;
}

SwitchingPolicySample sample_switching_policy(const SwitchingClassifier& classifier,
                                              int feature_count, std::uint64_t seed) {
  if (classifier.classes.empty()) {
    throw std::invalid_argument("sample_switching_policy: untrained classifier");
  }
  SwitchingPolicySample policy;
  policy.seed = seed;
  for (size_t c = 0; c < classifier.classes.size(); ++c) {
    const LaplaceClass& cls = classifier.classes[c];
    const Eigen::VectorXd w_inv = cls.w_diag.cwiseInverse();
    const Eigen::VectorXd pseudo_targets = cls.latent_mode + w_inv.cwiseProduct(cls.grad_loglik);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    policy.latents.push_back(draw_conditioned_sample(classifier.inputs, pseudo_targets, w_inv,
                                                     cls.matheron_jitter, cls.matheron_chol,
                                                     cls.params, feature_count, rng));
  }
  return policy;
}

}  // namespace gpsphs
