#include <benchmark/benchmark.h>

#include <cmath>

#include "gpsphs/gp_regression.hpp"
#include "gpsphs/rng.hpp"

using namespace gpsphs;

namespace {

struct Problem {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  KernelParams params;

  static Problem make(Eigen::Index n) {
    Rng rng(7);
    Problem p;
    p.inputs.resize(n, 1);
    p.targets.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p.inputs(i, 0) = rng.uniform(0.0, 5.0);
      p.targets[i] = std::sin(p.inputs(i, 0)) + 0.05 * rng.normal();
    }
    p.params.signal_std = 1.0;
    p.params.lengthscale_diag = Eigen::VectorXd::Constant(1, 2.0);
    return p;
  }
};

}  // namespace

static void BM_Fit(benchmark::State& state) {
  const Problem p = Problem::make(state.range(0));
  const Eigen::VectorXd noise = Eigen::VectorXd::Constant(1, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(p.inputs, p.targets, noise, p.params));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fit)->Arg(64)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

static void BM_Posterior(benchmark::State& state) {
  const Problem p = Problem::make(state.range(0));
  const GpModel model = fit(p.inputs, p.targets, Eigen::VectorXd::Constant(1, 0.01), p.params);
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, 2.345);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.posterior(q));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Posterior)->Arg(64)->Arg(256)->Arg(1024)->Complexity();

static void BM_NlmlWithGradient(benchmark::State& state) {
  const Problem p = Problem::make(state.range(0));
  Eigen::VectorXd log_params(3);
  log_params << 0.0, std::log(2.0), std::log(0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nlml(p.inputs, p.targets, NoiseSpec::learned(), log_params, true));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NlmlWithGradient)->Arg(64)->Arg(256)->Arg(512)->Complexity();

BENCHMARK_MAIN();
