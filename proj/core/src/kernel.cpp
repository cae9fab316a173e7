#include "gpsphs/kernel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gpsphs {

namespace {

void check_dim(const char* who, Eigen::Index expected, Eigen::Index actual) {
  if (expected != actual) {
    std::ostringstream os;
    os << who << ": input dimension mismatch, expected " << expected << ", got " << actual;
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void KernelParams::validate() const {
  if (!(signal_std > 0.0)) {
    throw std::invalid_argument("KernelParams: signal_std must be positive");
  }
  if (lengthscale_diag.size() == 0) {
    throw std::invalid_argument("KernelParams: empty lengthscale_diag");
  }
  for (Eigen::Index i = 0; i < lengthscale_diag.size(); ++i) {
    if (!(lengthscale_diag[i] > 0.0)) {
      throw std::invalid_argument("KernelParams: lengthscale_diag entries must be positive");
    }
  }
}

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                 const KernelParams& params) {
  check_dim("se_kernel", params.input_dim(), x.size());
  check_dim("se_kernel", params.input_dim(), x_prime.size());
  const Eigen::VectorXd d = x - x_prime;
  const double q = d.cwiseProduct(params.lengthscale_diag.cwiseProduct(d)).sum();
  return params.signal_std * params.signal_std * std::exp(-q);
}

double se_kernel_d1(double t, double t_prime, const KernelParams& params) {
  check_dim("se_kernel_d1", 1, params.input_dim());
  const double lam = params.lengthscale_diag[0];
  const double r = t - t_prime;
  const double k = params.signal_std * params.signal_std * std::exp(-lam * r * r);
  return -2.0 * lam * r * k;
}

double se_kernel_d12(double t, double t_prime, const KernelParams& params) {
  check_dim("se_kernel_d12", 1, params.input_dim());
  const double lam = params.lengthscale_diag[0];
  const double r = t - t_prime;
  const double k = params.signal_std * params.signal_std * std::exp(-lam * r * r);
  return (2.0 * lam - 4.0 * lam * lam * r * r) * k;
}

Eigen::VectorXd se_kernel_vector(const Eigen::VectorXd& x, const Eigen::MatrixXd& inputs,
                                 const KernelParams& params) {
  check_dim("se_kernel_vector", params.input_dim(), x.size());
  check_dim("se_kernel_vector", params.input_dim(), inputs.cols());
  const double sf2 = params.signal_std * params.signal_std;
  Eigen::VectorXd out(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const Eigen::VectorXd d = x - inputs.row(i).transpose();
    const double q = d.cwiseProduct(params.lengthscale_diag.cwiseProduct(d)).sum();
    out[i] = sf2 * std::exp(-q);
  }
  return out;
}

Eigen::VectorXd se_kernel_d1_vector(double t, const Eigen::MatrixXd& inputs,
                                    const KernelParams& params) {
  check_dim("se_kernel_d1_vector", 1, params.input_dim());
  check_dim("se_kernel_d1_vector", 1, inputs.cols());
  Eigen::VectorXd out(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    out[i] = se_kernel_d1(t, inputs(i, 0), params);
  }
  return out;
}

Eigen::MatrixXd se_kernel_matrix(const Eigen::MatrixXd& inputs, const KernelParams& params) {
  check_dim("se_kernel_matrix", params.input_dim(), inputs.cols());
  const Eigen::Index n = inputs.rows();
  const double sf2 = params.signal_std * params.signal_std;
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = sf2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const Eigen::VectorXd d = inputs.row(i) - inputs.row(j);
      const double q = d.cwiseProduct(params.lengthscale_diag.cwiseProduct(d)).sum();
      k(i, j) = sf2 * std::exp(-q);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

double base_jitter(const KernelParams& params) {
  return 1e-10 * params.signal_std * params.signal_std;
}

GramMatrix gram(const Eigen::MatrixXd& inputs, const KernelParams& params,
                const Eigen::VectorXd& noise_diag) {
  params.validate();
  const Eigen::Index n = inputs.rows();
  if (n == 0) {
    throw std::invalid_argument("gram: empty input set");
  }
  if (noise_diag.size() != n && noise_diag.size() != 1) {
    std::ostringstream os;
    os << "gram: noise_diag length " << noise_diag.size() << " does not match N = " << n
       << " (nor broadcast length 1)";
    throw std::invalid_argument(os.str());
  }
  for (Eigen::Index i = 0; i < noise_diag.size(); ++i) {
    if (noise_diag[i] < 0.0) {
      throw std::invalid_argument("gram: negative noise variance");
    }
  }

  GramMatrix g;
  g.entries = se_kernel_matrix(inputs, params);
  if (noise_diag.size() == 1) {
    g.entries.diagonal().array() += noise_diag[0];
  } else {
    g.entries.diagonal() += noise_diag;
  }

  const double max_jitter = 1e-4 * params.signal_std * params.signal_std;
  double jitter = base_jitter(params);
  while (true) {
    Eigen::MatrixXd attempt = g.entries;
    attempt.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(attempt);
    if (llt.info() == Eigen::Success) {
      g.entries = attempt;
      g.jitter = jitter;
      g.chol = std::move(llt);
      return g;
    }
    if (jitter >= max_jitter) {
      std::ostringstream os;
      os << "gram: Cholesky failed after jitter escalation to " << jitter
         << " (N = " << n << ", signal_std = " << params.signal_std
         << ", min diag = " << g.entries.diagonal().minCoeff()
         << ", max |entry| = " << g.entries.cwiseAbs().maxCoeff() << ")";
      throw std::runtime_error(os.str());
    }
    jitter *= 10.0;
  }
}

}  // namespace gpsphs
