#include "gpsphs/pathwise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpsphs {

RandomFourierBasis RandomFourierBasis::draw(const KernelParams& params, int feature_count,
                                            Rng& rng) {
  if (feature_count < 1) {
    throw std::invalid_argument("RandomFourierBasis: feature_count must be >= 1");
  }
  const Eigen::Index d = params.input_dim();
  RandomFourierBasis basis;
  basis.frequencies.resize(feature_count, d);
  basis.phases.resize(feature_count);
  basis.weights.resize(feature_count);
  // k(r) = sf^2 exp(-r^T Lambda r) has spectral measure N(0, 2 Lambda).
  Eigen::VectorXd scale = (2.0 * params.lengthscale_diag.array()).sqrt();
  const double amp = params.signal_std * std::sqrt(2.0 / feature_count);
  for (int f = 0; f < feature_count; ++f) {
    for (Eigen::Index k = 0; k < d; ++k) {
      basis.frequencies(f, k) = scale[k] * rng.normal();
    }
    basis.phases[f] = rng.uniform(0.0, 2.0 * M_PI);
    basis.weights[f] = amp * rng.normal();
  }
  return basis;
}

double RandomFourierBasis::eval(const Eigen::VectorXd& x) const {
  return weights.dot(((frequencies * x).array() + phases.array()).cos().matrix());
}

Eigen::VectorXd RandomFourierBasis::eval_rows(const Eigen::MatrixXd& inputs) const {
  // (N x F) phase matrix; evaluated row-block-wise to bound memory on large N*F.
  const Eigen::Index n = inputs.rows();
  Eigen::VectorXd out(n);
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index len = std::min(kBlock, n - start);
    Eigen::MatrixXd phase = inputs.middleRows(start, len) * frequencies.transpose();
    phase.rowwise() += phases.transpose();
    out.segment(start, len) = phase.array().cos().matrix() * weights;
  }
  return out;
}

double PathwiseConditionedSample::eval(const Eigen::VectorXd& x) const {
  double value = prior.eval(x);
  if (train_inputs.rows() > 0) {
    value += se_kernel_vector(x, train_inputs, params).dot(update_coeffs);
  }
  return value;
}

PathwiseConditionedSample draw_conditioned_sample(
    const Eigen::MatrixXd& train_inputs, const Eigen::VectorXd& targets,
    const Eigen::VectorXd& noise_diag, double jitter, const Eigen::LLT<Eigen::MatrixXd>& chol,
    const KernelParams& params, int feature_count, Rng& rng) {
  PathwiseConditionedSample sample;
  sample.prior = RandomFourierBasis::draw(params, feature_count, rng);
  sample.train_inputs = train_inputs;
  sample.params = params;

  const Eigen::Index n = train_inputs.rows();
  if (n == 0) return sample;  // pure prior draw

  if (targets.size() != n || noise_diag.size() != n) {
    throw std::invalid_argument("draw_conditioned_sample: inconsistent training data");
  }
  Eigen::VectorXd residual = targets - sample.prior.eval_rows(train_inputs);
  for (Eigen::Index i = 0; i < n; ++i) {
    residual[i] -= std::sqrt(noise_diag[i] + jitter) * rng.normal();
  }
  sample.update_coeffs = chol.solve(residual);
  return sample;
}

}  // namespace gpsphs
