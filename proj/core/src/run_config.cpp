#include "gpsphs/run_config.hpp"

#include <stdexcept>

#include "gpsphs/ini.hpp"

namespace gpsphs {

namespace {

std::array<double, 2> to_span(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 2) throw std::runtime_error(what + ": expected two values (t0 t1)");
  return {v[0], v[1]};
}

}  // namespace

void RunConfig::validate() const {
  if (dataset.config.n_trajectories < 1) {
    throw std::runtime_error("RunConfig: dataset.n_traj must be >= 1");
  }
  if (!(dataset.config.sample_dt > 0.0) || !(dataset.config.fine_dt > 0.0)) {
    throw std::runtime_error("RunConfig: dataset step sizes must be positive");
  }
  if (!(dataset.config.t_span[1] > dataset.config.t_span[0])) {
    throw std::runtime_error("RunConfig: dataset.t_span must satisfy t1 > t0");
  }
  if (!(simulate.dt > 0.0)) throw std::runtime_error("RunConfig: simulate.dt must be positive");
  if (!(simulate.t_span[1] > simulate.t_span[0])) {
    throw std::runtime_error("RunConfig: simulate.t_span must satisfy t1 > t0");
  }
  if (simulate.n_samples < 1) throw std::runtime_error("RunConfig: simulate.n_samples >= 1");
  if (simulate.feature_count < 1) {
    throw std::runtime_error("RunConfig: simulate.feature_count >= 1");
  }
  if (!(evaluate.config.horizon > 0.0)) {
    throw std::runtime_error("RunConfig: evaluate.horizon must be positive");
  }
}

RunConfig RunConfig::load(const std::string& path) {
  const IniFile ini = IniFile::parse_file(path);
  ini.require_known_sections({"dataset", "train", "simulate", "evaluate"});
  ini.require_known_keys("dataset",
                         {"n_traj", "t_span", "sample_dt", "snr_db", "fine_dt", "seed"});
  ini.require_known_keys(
      "train", {"seed", "restarts", "surrogate_restarts", "surrogate_max_iters",
                "hamiltonian_max_iters", "hamiltonian_restarts", "classifier_max_iters",
                "classifier_restarts", "policy_feature_count"});
  ini.require_known_keys(
      "simulate", {"x0", "dt", "t_span", "n_samples", "feature_count", "integrator", "seed"});
  ini.require_known_keys("evaluate", {"test_x0", "horizon", "dt", "n_samples", "feature_count",
                                      "fine_dt", "seed", "accuracy_threshold", "mse_threshold"});

  RunConfig cfg;
  const std::string ds = "dataset";
  if (ini.has(ds, "n_traj")) cfg.dataset.config.n_trajectories = static_cast<int>(ini.get_int(ds, "n_traj"));
  if (ini.has(ds, "t_span")) cfg.dataset.config.t_span = to_span(ini.get_vector(ds, "t_span"), "dataset.t_span");
  if (ini.has(ds, "sample_dt")) cfg.dataset.config.sample_dt = ini.get_double(ds, "sample_dt");
  if (ini.has(ds, "fine_dt")) cfg.dataset.config.fine_dt = ini.get_double(ds, "fine_dt");
  if (ini.has(ds, "seed")) cfg.dataset.seed = static_cast<std::uint64_t>(ini.get_int(ds, "seed"));
  if (ini.has(ds, "snr_db")) {
    const auto v = ini.get_vector(ds, "snr_db");
    if (v.size() != 3) throw std::runtime_error("dataset.snr_db: expected three values");
    cfg.dataset.config.snr_db = {v[0], v[1], v[2]};
  }

  const std::string tr = "train";
  if (ini.has(tr, "seed")) cfg.train.seed = static_cast<std::uint64_t>(ini.get_int(tr, "seed"));
  if (ini.has(tr, "restarts")) {
    // Generic restart count for every stage; stage-specific keys override.
    const int r = static_cast<int>(ini.get_int(tr, "restarts"));
    cfg.train.config.surrogate.optimize.restarts = r;
    cfg.train.config.hamiltonian.restarts = r;
    cfg.train.config.classifier.optimize.restarts = r;
  }
  if (ini.has(tr, "surrogate_restarts")) {
    cfg.train.config.surrogate.optimize.restarts =
        static_cast<int>(ini.get_int(tr, "surrogate_restarts"));
  }
  if (ini.has(tr, "surrogate_max_iters")) {
    cfg.train.config.surrogate.optimize.max_iterations =
        static_cast<int>(ini.get_int(tr, "surrogate_max_iters"));
  }
  if (ini.has(tr, "hamiltonian_max_iters")) {
    cfg.train.config.hamiltonian.max_iterations =
        static_cast<int>(ini.get_int(tr, "hamiltonian_max_iters"));
  }
  if (ini.has(tr, "hamiltonian_restarts")) {
    cfg.train.config.hamiltonian.restarts =
        static_cast<int>(ini.get_int(tr, "hamiltonian_restarts"));
  }
  if (ini.has(tr, "classifier_max_iters")) {
    cfg.train.config.classifier.optimize.max_iterations =
        static_cast<int>(ini.get_int(tr, "classifier_max_iters"));
  }
  if (ini.has(tr, "classifier_restarts")) {
    cfg.train.config.classifier.optimize.restarts =
        static_cast<int>(ini.get_int(tr, "classifier_restarts"));
  }
  if (ini.has(tr, "policy_feature_count")) {
    cfg.train.config.policy_feature_count =
        static_cast<int>(ini.get_int(tr, "policy_feature_count"));
  }

  const std::string si = "simulate";
  if (ini.has(si, "x0")) {
    const auto v = ini.get_vector(si, "x0");
    if (v.size() != 3) throw std::runtime_error("simulate.x0: expected three values");
    cfg.simulate.x0 = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (ini.has(si, "dt")) cfg.simulate.dt = ini.get_double(si, "dt");
  if (ini.has(si, "t_span")) cfg.simulate.t_span = to_span(ini.get_vector(si, "t_span"), "simulate.t_span");
  if (ini.has(si, "n_samples")) cfg.simulate.n_samples = static_cast<int>(ini.get_int(si, "n_samples"));
  if (ini.has(si, "feature_count")) {
    cfg.simulate.feature_count = static_cast<int>(ini.get_int(si, "feature_count"));
  }
  if (ini.has(si, "integrator")) {
    const std::string kind = ini.get(si, "integrator");
    if (kind == "euler") {
      cfg.simulate.integrator = IntegratorKind::explicit_euler;
    } else if (kind == "rk4") {
      cfg.simulate.integrator = IntegratorKind::rk4;
    } else {
      throw std::runtime_error("simulate.integrator: expected 'euler' or 'rk4'");
    }
  }
  if (ini.has(si, "seed")) cfg.simulate.seed = static_cast<std::uint64_t>(ini.get_int(si, "seed"));

  const std::string ev = "evaluate";
  if (ini.has(ev, "test_x0")) {
    const auto v = ini.get_vector(ev, "test_x0");
    if (v.size() != 3) throw std::runtime_error("evaluate.test_x0: expected three values");
    cfg.evaluate.config.test_x0 = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  if (ini.has(ev, "horizon")) cfg.evaluate.config.horizon = ini.get_double(ev, "horizon");
  if (ini.has(ev, "dt")) cfg.evaluate.config.dt = ini.get_double(ev, "dt");
  if (ini.has(ev, "n_samples")) {
    cfg.evaluate.config.n_samples = static_cast<int>(ini.get_int(ev, "n_samples"));
  }
  if (ini.has(ev, "feature_count")) {
    cfg.evaluate.config.feature_count = static_cast<int>(ini.get_int(ev, "feature_count"));
  }
  if (ini.has(ev, "fine_dt")) cfg.evaluate.config.fine_dt = ini.get_double(ev, "fine_dt");
  if (ini.has(ev, "seed")) {
    cfg.evaluate.config.seed = static_cast<std::uint64_t>(ini.get_int(ev, "seed"));
  }
  if (ini.has(ev, "accuracy_threshold")) {
    cfg.evaluate.accuracy_threshold = ini.get_double(ev, "accuracy_threshold");
  }
  if (ini.has(ev, "mse_threshold")) cfg.evaluate.mse_threshold = ini.get_double(ev, "mse_threshold");

  cfg.validate();
  return cfg;
}

}  // namespace gpsphs
