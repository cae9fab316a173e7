#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "gpsphs/kernel.hpp"
#include "gpsphs/rng.hpp"

using namespace gpsphs;

namespace {

KernelParams make_params(double sf, std::initializer_list<double> lambdas) {
  KernelParams p;
  p.signal_std = sf;
  p.lengthscale_diag.resize(static_cast<Eigen::Index>(lambdas.size()));
  Eigen::Index i = 0;
  for (double l : lambdas) p.lengthscale_diag[i++] = l;
  return p;
}

Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST_CASE("se_kernel at zero distance gives signal variance") {
  const KernelParams p = make_params(2.0, {0.7, 3.0});
  Eigen::VectorXd x(2);
  x << -1.3, 0.4;
  CHECK(se_kernel(x, x, p) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("se_kernel decays to zero far away") {
  const KernelParams p = make_params(1.0, {1.0});
  CHECK(se_kernel(vec1(0.0), vec1(40.0), p) < 1e-300);
}

TEST_CASE("se_kernel closed form value") {
  // sf = 1, Lambda = diag(0.5), |x - x'| = 1: exp(-0.5), checked against a
  // high-precision evaluation of the closed form.
  const KernelParams p = make_params(1.0, {0.5});
  CHECK(se_kernel(vec1(0.0), vec1(1.0), p) ==
        doctest::Approx(0.6065306597126334).epsilon(1e-14));
}

TEST_CASE("se_kernel symmetry and boundedness on random inputs") {
  Rng rng(7);
  const KernelParams p = make_params(1.7, {0.3, 2.0, 5.0});
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x = rng.normal_vector(3);
    Eigen::VectorXd y = rng.normal_vector(3);
    const double kxy = se_kernel(x, y, p);
    CHECK(kxy == se_kernel(y, x, p));
    CHECK(kxy > 0.0);
    CHECK(kxy <= 1.7 * 1.7);
  }
}

TEST_CASE("se_kernel dimension mismatch names expected and actual dims") {
  const KernelParams p = make_params(1.0, {1.0, 1.0});
  CHECK_THROWS_WITH_AS(se_kernel(vec1(0.0), vec1(0.0), p),
                       doctest::Contains("expected 2"), std::invalid_argument);
}

TEST_CASE("se_kernel_d1 vanishes at zero lag") {
  const KernelParams p = make_params(1.4, {2.2});
  CHECK(se_kernel_d1(0.3, 0.3, p) == 0.0);
}

TEST_CASE("se_kernel_d1 closed form value") {
  // d/dz sf^2 e^{-lam (z-t')^2} = -2 lam (z-t') k; at (0, 1) with lam = 1: 2/e.
  const KernelParams p = make_params(1.0, {1.0});
  CHECK(se_kernel_d1(0.0, 1.0, p) == doctest::Approx(0.7357588823428846).epsilon(1e-14));
}

TEST_CASE("se_kernel_d1 matches central finite differences") {
  Rng rng(11);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const KernelParams p = make_params(rng.log_uniform(0.3, 3.0), {rng.log_uniform(0.1, 4.0)});
    const double t = rng.uniform(-2.0, 2.0);
    const double tp = rng.uniform(-2.0, 2.0);
    const double fd =
        (se_kernel(vec1(t + h), vec1(tp), p) - se_kernel(vec1(t - h), vec1(tp), p)) / (2.0 * h);
    const double analytic = se_kernel_d1(t, tp, p);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("se_kernel_d1 antisymmetric against the second-argument derivative") {
  Rng rng(13);
  const double h = 1e-6;
  const KernelParams p = make_params(1.2, {0.8});
  for (int trial = 0; trial < 25; ++trial) {
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    const double d2 =
        (se_kernel(vec1(a), vec1(b + h), p) - se_kernel(vec1(a), vec1(b - h), p)) / (2.0 * h);
    CHECK(se_kernel_d1(a, b, p) == doctest::Approx(-d2).epsilon(1e-6));
  }
}

TEST_CASE("se_kernel_d12 at zero lag equals 2 lambda sf^2") {
  CHECK(se_kernel_d12(0.7, 0.7, make_params(1.0, {1.0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(se_kernel_d12(-1.2, -1.2, make_params(3.0, {0.25})) ==
        doctest::Approx(4.5).epsilon(1e-14));
}

TEST_CASE("se_kernel_d12 matches finite differences of se_kernel_d1") {
  Rng rng(17);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const KernelParams p = make_params(rng.log_uniform(0.3, 3.0), {rng.log_uniform(0.1, 4.0)});
    const double t = rng.uniform(-2.0, 2.0);
    const double tp = rng.uniform(-2.0, 2.0);
    const double fd = (se_kernel_d1(t, tp + h, p) - se_kernel_d1(t, tp - h, p)) / (2.0 * h);
    const double analytic = se_kernel_d12(t, tp, p);
    CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("gram of a single point") {
  const KernelParams p = make_params(1.0, {1.0});
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  const GramMatrix g = gram(x, p, Eigen::VectorXd::Constant(1, 0.01));
  CHECK(g.entries(0, 0) == doctest::Approx(1.01).epsilon(1e-9));
  CHECK(g.jitter > 0.0);
}

TEST_CASE("duplicate inputs are rank-deficient before jitter") {
  const KernelParams p = make_params(1.0, {1.0});
  Eigen::MatrixXd x(2, 1);
  x << 0.5, 0.5;
  // Without jitter the kernel matrix is exactly singular.
  Eigen::MatrixXd raw = se_kernel_matrix(x, p);
  Eigen::LLT<Eigen::MatrixXd> raw_llt(raw);
  CHECK(raw_llt.info() != Eigen::Success);
  const GramMatrix g = gram(x, p, Eigen::VectorXd::Zero(2));
  CHECK(g.chol.info() == Eigen::Success);
  CHECK(g.jitter >= base_jitter(p));
}

TEST_CASE("gram equals element-wise kernel evaluation plus diagonal") {
  Rng rng(19);
  const KernelParams p = make_params(1.3, {0.5, 2.0});
  Eigen::MatrixXd x(5, 2);
  for (Eigen::Index i = 0; i < 5; ++i) x.row(i) = rng.normal_vector(2);
  Eigen::VectorXd noise(5);
  for (Eigen::Index i = 0; i < 5; ++i) noise[i] = rng.uniform(0.0, 0.3);
  const GramMatrix g = gram(x, p, noise);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      double expected = se_kernel(x.row(i), x.row(j), p);
      if (i == j) expected += noise[i] + g.jitter;
      CHECK(g.entries(i, j) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("gram broadcasts scalar noise and rejects bad input") {
  const KernelParams p = make_params(1.0, {1.0});
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 1.0, 2.0;
  const GramMatrix g = gram(x, p, Eigen::VectorXd::Constant(1, 0.5));
  for (int i = 0; i < 3; ++i) CHECK(g.entries(i, i) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK_THROWS_AS(gram(Eigen::MatrixXd(0, 1), p, Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(gram(x, p, Eigen::VectorXd::Constant(3, -0.1)), std::invalid_argument);
  CHECK_THROWS_AS(gram(x, p, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("jittered gram is positive semidefinite for random point sets") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index n = 16 + static_cast<Eigen::Index>(rng.uniform_index(49));
    const KernelParams p = make_params(rng.log_uniform(0.5, 2.0),
                                       {rng.log_uniform(0.2, 2.0), rng.log_uniform(0.2, 2.0)});
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = rng.normal_vector(2);
    const GramMatrix g = gram(x, p, Eigen::VectorXd::Zero(1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * p.signal_std * p.signal_std);
  }
}

TEST_CASE("invalid kernel parameters are rejected") {
  CHECK_THROWS_AS(make_params(0.0, {1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_params(1.0, {-1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(KernelParams{}.validate(), std::invalid_argument);
}
