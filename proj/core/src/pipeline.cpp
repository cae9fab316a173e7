#include "gpsphs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/SVD>

#include "gpsphs/rng.hpp"

namespace gpsphs {

std::vector<std::pair<Eigen::Index, Eigen::Index>> TrajectoryDataset::trajectory_ranges() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  const Eigen::Index n = size();
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || trajectory_ids[static_cast<size_t>(i)] !=
                      trajectory_ids[static_cast<size_t>(begin)]) {
      ranges.emplace_back(begin, i);
      begin = i;
    }
  }
  return ranges;
}

void TrajectoryDataset::validate(int n_modes) const {
  const Eigen::Index n = size();
  if (n == 0) throw std::invalid_argument("TrajectoryDataset: empty");
  if (states.rows() != n || inputs.rows() != n ||
      static_cast<Eigen::Index>(modes.size()) != n ||
      static_cast<Eigen::Index>(trajectory_ids.size()) != n) {
    throw std::invalid_argument("TrajectoryDataset: inconsistent row counts");
  }
  std::set<int> seen_ids;
  for (const auto& [begin, end] : trajectory_ranges()) {
    const int id = trajectory_ids[static_cast<size_t>(begin)];
    if (!seen_ids.insert(id).second) {
      std::ostringstream os;
      os << "TrajectoryDataset: trajectory id " << id << " appears in non-contiguous blocks";
      throw std::invalid_argument(os.str());
    }
    for (Eigen::Index i = begin + 1; i < end; ++i) {
      if (!(times[i] > times[i - 1])) {
        std::ostringstream os;
        os << "TrajectoryDataset: times not strictly increasing at row " << i
           << " (trajectory " << id << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const int s = modes[static_cast<size_t>(i)];
    if (s < 1 || (n_modes > 0 && s > n_modes)) {
      std::ostringstream os;
      os << "TrajectoryDataset: mode id " << s << " out of range at row " << i;
      throw std::invalid_argument(os.str());
    }
  }
}

SurrogateFit fit_surrogate(const TrajectoryDataset& dataset, const SurrogateOptions& options,
                           std::uint64_t seed) {
  dataset.validate();
  const Eigen::Index n_dim = dataset.state_dim();
  const auto ranges = dataset.trajectory_ranges();
  for (const auto& [begin, end] : ranges) {
    if (end - begin < 3) {
      std::ostringstream os;
      os << "fit_surrogate: trajectory " << dataset.trajectory_ids[static_cast<size_t>(begin)]
         << " has fewer than 3 samples";
      throw std::invalid_argument(os.str());
    }
  }

  SurrogateFit fit_out;
  fit_out.denoised_states.resize(dataset.size(), n_dim);
  fit_out.derivative_means.resize(dataset.size(), n_dim);
  fit_out.derivative_variances.resize(dataset.size(), n_dim);

  for (const auto& range : ranges) {
    const auto [begin, end] = range;
    const Eigen::Index len = end - begin;
    const Eigen::MatrixXd t = dataset.times.segment(begin, len);
    for (Eigen::Index j = 0; j < n_dim; ++j) {
      // The zero-mean GP is fit to the per-trajectory-centered signal; the
      // offset is added back to the state estimate and drops out of the
      // derivative. Raw states sit far from zero, which drags the
      // marginal-likelihood optimum into an over-smoothed basin.
      const Eigen::VectorXd y_raw = dataset.states.col(j).segment(begin, len);
      const double offset = y_raw.mean();
      const Eigen::VectorXd y = y_raw.array() - offset;
      // Keyed by trajectory id (not position) so fitting a concatenated
      // dataset matches fitting each trajectory separately.
      const int traj_id = dataset.trajectory_ids[static_cast<size_t>(begin)];
      const std::uint64_t sub_seed = derive_seed(
          seed, 1 + static_cast<std::uint64_t>(static_cast<std::int64_t>(traj_id)),
          static_cast<std::uint64_t>(j));
      OptimizeResult opt;
      try {
        opt = optimize_hyperparams(t, y, NoiseSpec::learned(), options.optimize, sub_seed);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "fit_surrogate: trajectory "
           << dataset.trajectory_ids[static_cast<size_t>(begin)] << ", dimension " << j << ": "
           << e.what();
        throw std::runtime_error(os.str());
      }
      const GpModel model = fit(t, y, opt.noise, opt.params);
      for (Eigen::Index i = 0; i < len; ++i) {
        const double ti = t(i, 0);
        fit_out.denoised_states(begin + i, j) = model.posterior(t.row(i)).mean + offset;
        const PosteriorGaussian d = model.posterior_derivative(ti);
        fit_out.derivative_means(begin + i, j) = d.mean;
        fit_out.derivative_variances(begin + i, j) = d.variance;
      }
      SurrogateDiagnostics diag;
      diag.trajectory_id = dataset.trajectory_ids[static_cast<size_t>(begin)];
      diag.dim = static_cast<int>(j);
      diag.params = opt.params;
      diag.noise_variance = opt.noise.size() > 0 ? opt.noise[0] : 0.0;
      diag.nlml = opt.nlml;
      diag.gradient_norm = opt.gradient_norm;
      diag.iterations = opt.iterations;
      diag.converged = opt.converged;
      fit_out.diagnostics.push_back(diag);
    }
  }
  return fit_out;
}

HamiltonianTrainingSet build_hamiltonian_dataset(const SphsStructure& structure,
                                                 const SurrogateFit& surrogate,
                                                 const Eigen::MatrixXd& inputs_u,
                                                 const std::vector<int>& modes,
                                                 const HamiltonianDatasetOptions& options) {
  const Eigen::Index n = structure.n;
  const Eigen::Index n_rows = surrogate.denoised_states.rows();
  if (surrogate.denoised_states.cols() != n) {
    throw std::invalid_argument("build_hamiltonian_dataset: state dimension mismatch");
  }
  if (static_cast<Eigen::Index>(modes.size()) != n_rows || inputs_u.rows() != n_rows) {
    throw std::invalid_argument("build_hamiltonian_dataset: row count mismatch");
  }

  struct DimAccumulator {
    std::vector<Eigen::Index> index_set;
    std::vector<double> targets;
    std::vector<double> noise;
  };
  std::vector<DimAccumulator> acc(static_cast<size_t>(n));

  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const Eigen::VectorXd x_bar = surrogate.denoised_states.row(i);
    const Eigen::VectorXd xdot_bar = surrogate.derivative_means.row(i);
    const Eigen::VectorXd xdot_var = surrogate.derivative_variances.row(i);
    const int mode = modes[static_cast<size_t>(i)];
    structure.check_mode(mode);

    const Eigen::MatrixXd a = structure.J(mode, x_bar) - structure.R(mode, x_bar);
    Eigen::VectorXd b = xdot_bar;
    if (structure.m > 0) b -= structure.G(x_bar) * inputs_u.row(i).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = options.rank_tolerance_factor * sigma[0];
    Eigen::Index rank = 0;
    while (rank < n && sigma[rank] > cutoff) ++rank;
    if (rank == 0) continue;  // A vanishes; nothing recoverable at this sample

    const bool invertible = rank == n;
    if (!invertible) {
      // b must lie in col(A) for any component of grad H to be identified.
      // The gate accounts for the derivative-estimate noise: the residual of
      // an honest sample is the orthogonal projection of that noise, with
      // expected squared norm sum_k var_k (1 - P_kk).
      const Eigen::MatrixXd u_r = svd.matrixU().leftCols(rank);
      const Eigen::VectorXd residual = b - u_r * (u_r.transpose() * b);
      double noise_var = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double p_kk = u_r.row(k).squaredNorm();
        noise_var += xdot_var[k] * std::max(0.0, 1.0 - p_kk);
      }
      const double threshold =
          options.column_space_tolerance * std::max(b.norm(), 1e-12) +
          6.0 * std::sqrt(noise_var);
      if (residual.norm() > threshold) continue;
    }

    // Rows of the pseudo-inverse: A^+ = V Sigma^+ U^T (equals A^{-1} when full rank).
    const Eigen::MatrixXd v_r = svd.matrixV().leftCols(rank);
    Eigen::VectorXd sigma_inv(rank);
    for (Eigen::Index k = 0; k < rank; ++k) sigma_inv[k] = 1.0 / sigma[k];
    const Eigen::MatrixXd pinv =
        v_r * sigma_inv.asDiagonal() * svd.matrixU().leftCols(rank).transpose();

    for (Eigen::Index j = 0; j < n; ++j) {
      if (!invertible) {
        // e_j must lie in the span of the leading right-singular vectors for
        // p^j b to determine grad_j H uniquely.
        const Eigen::VectorXd ej_proj = v_r * v_r.row(j).transpose();
        Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
        ej[j] = 1.0;
        if ((ej - ej_proj).norm() > options.basis_tolerance) continue;
      }
      const Eigen::VectorXd p = pinv.row(j);
      acc[static_cast<size_t>(j)].index_set.push_back(i);
      acc[static_cast<size_t>(j)].targets.push_back(p.dot(b));
      acc[static_cast<size_t>(j)].noise.push_back(
          p.cwiseProduct(p).dot(xdot_var));
    }
  }

  HamiltonianTrainingSet hset;
  for (Eigen::Index j = 0; j < n; ++j) {
    const DimAccumulator& a = acc[static_cast<size_t>(j)];
    if (a.index_set.empty()) {
      std::ostringstream os;
      os << "build_hamiltonian_dataset: dimension " << j + 1 << " unidentifiable from data";
      throw std::runtime_error(os.str());
    }
    HamiltonianTrainingSet::Dim dim;
    const Eigen::Index nj = static_cast<Eigen::Index>(a.index_set.size());
    dim.inputs.resize(nj, n);
    dim.targets.resize(nj);
    dim.noise_variances.resize(nj);
    for (Eigen::Index r = 0; r < nj; ++r) {
      dim.inputs.row(r) = surrogate.denoised_states.row(a.index_set[static_cast<size_t>(r)]);
      dim.targets[r] = a.targets[static_cast<size_t>(r)];
      dim.noise_variances[r] = a.noise[static_cast<size_t>(r)];
    }
    dim.index_set = a.index_set;
    hset.dims.push_back(std::move(dim));
  }
  return hset;
}

GradientField HamiltonianGP::mean_field() const {
  std::vector<GpModel> models = dims;  // value capture keeps the field self-contained
  GradientField field;
  field.eval = [models](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(models.size()));
    for (size_t j = 0; j < models.size(); ++j) {
      g[static_cast<Eigen::Index>(j)] = models[j].posterior(x).mean;
    }
    return g;
  };
  return field;
}

HamiltonianGP fit_hamiltonian_gp(const HamiltonianTrainingSet& hset,
                                 const OptimizeOptions& options, std::uint64_t seed) {
  HamiltonianGP hgp;
  for (size_t j = 0; j < hset.dims.size(); ++j) {
    const auto& dim = hset.dims[j];
    if (dim.inputs.rows() < 3) {
      std::ostringstream os;
      os << "fit_hamiltonian_gp: dimension " << j << " has fewer than 3 training points";
      throw std::invalid_argument(os.str());
    }
    OptimizeResult opt;
    try {
      opt = optimize_hyperparams(dim.inputs, dim.targets,
                                 NoiseSpec::fixed_vector(dim.noise_variances), options,
                                 derive_seed(seed, static_cast<std::uint64_t>(j)));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "fit_hamiltonian_gp: dimension " << j << ": " << e.what();
      throw std::runtime_error(os.str());
    }
    hgp.dims.push_back(fit(dim.inputs, dim.targets, dim.noise_variances, opt.params));
    HamiltonianDimDiagnostics diag;
    diag.n_points = dim.inputs.rows();
    diag.params = opt.params;
    diag.nlml = opt.nlml;
    diag.gradient_norm = opt.gradient_norm;
    diag.iterations = opt.iterations;
    diag.converged = opt.converged;
    hgp.diagnostics.push_back(diag);
  }
  return hgp;
}

ClassifierDataset build_classifier_dataset(const SurrogateFit& surrogate,
                                           const std::vector<int>& modes) {
  if (static_cast<Eigen::Index>(modes.size()) != surrogate.denoised_states.rows()) {
    throw std::invalid_argument("build_classifier_dataset: row count mismatch");
  }
  return ClassifierDataset{surrogate.denoised_states, modes};
}

TrainedModel train(const TrajectoryDataset& dataset, const SphsStructure& structure,
                   const TrainConfig& config, std::uint64_t seed) {
  dataset.validate(structure.n_modes);
  if (dataset.state_dim() != structure.n) {
    throw std::invalid_argument("train: dataset state dimension does not match structure");
  }
  if (dataset.input_dim() != structure.m) {
    throw std::invalid_argument("train: dataset input dimension does not match structure");
  }

  // Structural sanity on the observed states before inverting J - R anywhere.
  std::vector<Eigen::VectorXd> probe_states;
  const Eigen::Index stride = std::max<Eigen::Index>(1, dataset.size() / 16);
  for (Eigen::Index i = 0; i < dataset.size(); i += stride) {
    probe_states.push_back(dataset.states.row(i));
  }
  const StructureValidation validation = validate_structure(structure, probe_states);
  if (!validation.passed) {
    std::ostringstream os;
    os << "train: structure validation failed;";
    for (const auto& mr : validation.modes) {
      os << " mode " << mr.mode << ": skew violation " << mr.max_skew_violation
         << ", R asymmetry " << mr.max_r_asymmetry << ", min R eigenvalue "
         << mr.min_r_eigenvalue << ";";
    }
    throw std::runtime_error(os.str());
  }

  TrainedModel model;
  model.seed = seed;
  model.policy_feature_count = config.policy_feature_count;

  SurrogateFit surrogate;
  try {
    surrogate = fit_surrogate(dataset, config.surrogate, derive_seed(seed, 101));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("train [surrogate stage]: ") + e.what());
  }
  model.surrogate_diagnostics = surrogate.diagnostics;

  HamiltonianTrainingSet hset;
  try {
    hset = build_hamiltonian_dataset(structure, surrogate, dataset.inputs, dataset.modes,
                                     config.hamiltonian_dataset);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("train [gradient dataset stage]: ") + e.what());
  }
  for (const auto& dim : hset.dims) model.points_per_dim.push_back(dim.inputs.rows());

  try {
    model.hamiltonian = fit_hamiltonian_gp(hset, config.hamiltonian, derive_seed(seed, 102));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("train [Hamiltonian GP stage]: ") + e.what());
  }

  try {
    const ClassifierDataset ds = build_classifier_dataset(surrogate, dataset.modes);
    model.classifier =
        train_classifier(ds.states, ds.modes, config.classifier, derive_seed(seed, 103));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("train [classifier stage]: ") + e.what());
  }
  model.training_accuracy = model.classifier.training_accuracy();
  return model;
}

}  // namespace gpsphs
