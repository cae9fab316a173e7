#include <benchmark/benchmark.h>

#include "gpsphs/kernel.hpp"
#include "gpsphs/rng.hpp"

using namespace gpsphs;

namespace {

KernelParams params3() {
  KernelParams p;
  p.signal_std = 1.3;
  p.lengthscale_diag = Eigen::Vector3d(0.5, 1.0, 2.0);
  return p;
}

Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = rng.normal_vector(d);
  return x;
}

}  // namespace

static void BM_SeKernel(benchmark::State& state) {
  const KernelParams p = params3();
  Rng rng(1);
  const Eigen::VectorXd a = rng.normal_vector(3), b = rng.normal_vector(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(se_kernel(a, b, p));
  }
}
BENCHMARK(BM_SeKernel);

static void BM_SeKernelVector(benchmark::State& state) {
  const KernelParams p = params3();
  const Eigen::MatrixXd x = random_inputs(state.range(0), 3, 2);
  Rng rng(3);
  const Eigen::VectorXd q = rng.normal_vector(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(se_kernel_vector(q, x, p));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SeKernelVector)->Arg(64)->Arg(256)->Arg(1024)->Complexity(benchmark::oN);

static void BM_GramAssembly(benchmark::State& state) {
  const KernelParams p = params3();
  const Eigen::MatrixXd x = random_inputs(state.range(0), 3, 5);
  const Eigen::VectorXd noise = Eigen::VectorXd::Constant(1, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram(x, p, noise));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GramAssembly)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Complexity();

BENCHMARK_MAIN();
