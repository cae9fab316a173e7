#include <benchmark/benchmark.h>

#include <cmath>

#include "gpsphs/pathwise.hpp"
#include "gpsphs/rng.hpp"
#include "gpsphs/simulate.hpp"

using namespace gpsphs;

namespace {

HamiltonianGP trained_model(Eigen::Index n_points) {
  Rng rng(11);
  KernelParams p;
  p.signal_std = 1.2;
  p.lengthscale_diag = Eigen::Vector3d(1.0, 1.0, 0.5);
  HamiltonianGP hgp;
  for (int dim = 0; dim < 3; ++dim) {
    Eigen::MatrixXd x(n_points, 3);
    Eigen::VectorXd y(n_points);
    for (Eigen::Index i = 0; i < n_points; ++i) {
      x.row(i) = rng.normal_vector(3);
      y[i] = std::sin(x(i, dim)) + 0.05 * rng.normal();
    }
    hgp.dims.push_back(fit(x, y, Eigen::VectorXd::Constant(1, 0.01), p));
  }
  return hgp;
}

}  // namespace

static void BM_SampleGradientField(benchmark::State& state) {
  const HamiltonianGP hgp = trained_model(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_gradient_field(hgp, 1024, seed++));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SampleGradientField)->Arg(64)->Arg(256)->Arg(512)->Complexity();

static void BM_PathwiseEval(benchmark::State& state) {
  const HamiltonianGP hgp = trained_model(state.range(0));
  const PathwiseSample sample = sample_gradient_field(hgp, 1024, 3);
  Rng rng(5);
  const Eigen::VectorXd q = rng.normal_vector(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample.eval(q));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PathwiseEval)->Arg(64)->Arg(256)->Arg(512)->Complexity();

static void BM_EulerSteps(benchmark::State& state) {
  // Throughput of the fixed-step loop on an analytic oscillator field.
  SphsStructure st;
  st.n = 2;
  st.m = 0;
  st.n_modes = 1;
  st.J = [](int, const Eigen::VectorXd&) {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
  };
  st.R = [](int, const Eigen::VectorXd&) { return Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 2)); };
  st.G = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(2, 0); };
  GradientField field;
  field.eval = [](const Eigen::VectorXd& x) { return x; };
  IntegrateOptions opts;
  opts.dt = 1e-3;
  opts.t_span = {0.0, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(st, field, [](const Eigen::VectorXd&) { return 1; },
                                       Eigen::Vector2d(1.0, 0.0), zero_input(0), opts));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_EulerSteps);

BENCHMARK_MAIN();
