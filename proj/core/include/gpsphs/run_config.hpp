#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "gpsphs/hopper.hpp"
#include "gpsphs/pipeline.hpp"

namespace gpsphs {

/// Per-command configuration, loadable from a sectioned key-value file.
/// Every seed is explicit; nothing here depends on the wall clock.
struct RunConfig {
  struct Dataset {
    DatasetConfig config;
    std::uint64_t seed = 1;
  } dataset;

  struct Train {
    TrainConfig config;
    std::uint64_t seed = 2;
  } train;

  struct Simulate {
    Eigen::Vector3d x0{0.7, 0.85, 0.0};
    double dt = 1e-3;
    std::array<double, 2> t_span{0.0, 3.0};
    int n_samples = 3;
    int feature_count = 1024;
    IntegratorKind integrator = IntegratorKind::explicit_euler;
    std::uint64_t seed = 3;
  } simulate;

  struct Evaluate {
    EvaluateConfig config{.seed = 4};
    double accuracy_threshold = 0.95;
    double mse_threshold = 0.5;
  } evaluate;

  static RunConfig load(const std::string& path);
  void validate() const;
};

}  // namespace gpsphs
