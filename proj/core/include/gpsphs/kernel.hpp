#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace gpsphs {

/// Hyperparameters of the squared-exponential kernel
///   k(x, x') = signal_std^2 * exp(-(x - x')^T diag(lengthscale_diag) (x - x')).
///
/// Note the convention: lengthscale_diag holds the entries of the metric
/// matrix multiplying the squared distance, so a LARGER entry means FASTER
/// decay along that dimension (the inverse of the more common 1/l^2 layout).
struct KernelParams {
  double signal_std = 1.0;
  Eigen::VectorXd lengthscale_diag;  // one positive entry per input dimension

  Eigen::Index input_dim() const { return lengthscale_diag.size(); }
  void validate() const;
};

/// Symmetric kernel matrix over a set of inputs, plus whatever diagonal
/// jitter was needed to make the Cholesky factorization succeed.
struct GramMatrix {
  Eigen::MatrixXd entries;            // N x N, includes noise and jitter on the diagonal
  double jitter = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol;   // factorization of `entries`
};

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
                 const KernelParams& params);

/// d/dz k(z, t') at z = t. Scalar inputs only (params.input_dim() == 1).
double se_kernel_d1(double t, double t_prime, const KernelParams& params);

/// d^2/(dz dz') k(z, z') at (t, t'). Scalar inputs only.
double se_kernel_d12(double t, double t_prime, const KernelParams& params);

/// Kernel vector k(x, X) against the rows of X.
Eigen::VectorXd se_kernel_vector(const Eigen::VectorXd& x, const Eigen::MatrixXd& inputs,
                                 const KernelParams& params);

/// First-derivative kernel vector k^(1)(t, T) against scalar inputs T.
Eigen::VectorXd se_kernel_d1_vector(double t, const Eigen::MatrixXd& inputs,
                                    const KernelParams& params);

/// Kernel-only Gram matrix (no noise, no jitter), N x N over the rows of `inputs`.
Eigen::MatrixXd se_kernel_matrix(const Eigen::MatrixXd& inputs, const KernelParams& params);

/// Gram matrix over the rows of `inputs` with per-point noise variances added
/// to the diagonal (noise_diag has length N, or length 1 to broadcast).
///
/// Jitter starts at 1e-10 * signal_std^2 and escalates tenfold until the
/// Cholesky factorization succeeds; escalation past 1e-4 * signal_std^2
/// throws with condition diagnostics.
GramMatrix gram(const Eigen::MatrixXd& inputs, const KernelParams& params,
                const Eigen::VectorXd& noise_diag);

/// Base jitter level used before any escalation.
double base_jitter(const KernelParams& params);

}  // namespace gpsphs
