#include <doctest.h>

#include <cmath>

#include "gpsphs/gp_classification.hpp"
#include "gpsphs/pipeline.hpp"
#include "gpsphs/rng.hpp"
#include "gpsphs/simulate.hpp"

using namespace gpsphs;

namespace {

/// Planar harmonic oscillator: J = [[0,1],[-1,0]], H = |x|^2 / 2; the flow is
/// a clockwise rotation with closed-form solution.
SphsStructure oscillator(double damping = 0.0) {
  SphsStructure st;
  st.n = 2;
  st.m = 0;
  st.n_modes = 1;
  st.J = [](int, const Eigen::VectorXd&) {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, 1.0, -1.0, 0.0;
    return j;
  };
  st.R = [damping](int, const Eigen::VectorXd&) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(1, 1) = damping;
    return r;
  };
  st.G = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(2, 0); };
  return st;
}

GradientField identity_field() {
  GradientField f;
  f.eval = [](const Eigen::VectorXd& x) { return x; };
  f.potential = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  return f;
}

int constant_mode(const Eigen::VectorXd&) { return 1; }

Eigen::Vector2d rotation_solution(const Eigen::Vector2d& x0, double t) {
  return {std::cos(t) * x0[0] + std::sin(t) * x0[1],
          -std::sin(t) * x0[0] + std::cos(t) * x0[1]};
}

KernelParams make_params(double sf, std::initializer_list<double> lambdas) {
  KernelParams p;
  p.signal_std = sf;
  p.lengthscale_diag.resize(static_cast<Eigen::Index>(lambdas.size()));
  Eigen::Index i = 0;
  for (double l : lambdas) p.lengthscale_diag[i++] = l;
  return p;
}

}  // namespace

TEST_CASE("integration of a zero field keeps the state constant") {
  GradientField zero;
  zero.eval = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); };
  IntegrateOptions opts;
  opts.dt = 1e-2;
  opts.t_span = {0.0, 1.0};
  Eigen::Vector2d x0(0.3, -0.8);
  const Rollout r = integrate(oscillator(), zero, constant_mode, x0, zero_input(0), opts);
  for (Eigen::Index k = 0; k < r.times.size(); ++k) {
    CHECK((r.states.row(k).transpose() - x0).norm() == 0.0);
    CHECK(r.energy[k] == 0.0);
  }
}

TEST_CASE("Euler tracks the closed-form rotation within tolerance") {
  IntegrateOptions opts;
  opts.dt = 1e-3;
  opts.t_span = {0.0, 1.0};
  Eigen::Vector2d x0(1.0, 0.0);
  const Rollout r = integrate(oscillator(), identity_field(), constant_mode, x0,
                              zero_input(0), opts);
  const Eigen::Index last = r.times.size() - 1;
  CHECK((r.states.row(last).transpose() - rotation_solution(x0, 1.0)).norm() <= 5e-3);
}

TEST_CASE("Euler exhibits first-order convergence under step halving") {
  Eigen::Vector2d x0(1.0, 0.0);
  auto final_error = [&](double dt) {
    IntegrateOptions opts;
    opts.dt = dt;
    opts.t_span = {0.0, 1.0};
    const Rollout r =
        integrate(oscillator(), identity_field(), constant_mode, x0, zero_input(0), opts);
    const Eigen::Index last = r.times.size() - 1;
    return (r.states.row(last).transpose() - rotation_solution(x0, 1.0)).norm();
  };
  const double ratio = final_error(2e-3) / final_error(1e-3);
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.5);
}

TEST_CASE("RK4 is far more accurate than Euler at the same step") {
  IntegrateOptions opts;
  opts.dt = 1e-2;
  opts.t_span = {0.0, 1.0};
  opts.integrator = IntegratorKind::rk4;
  Eigen::Vector2d x0(1.0, 0.0);
  const Rollout r = integrate(oscillator(), identity_field(), constant_mode, x0,
                              zero_input(0), opts);
  const Eigen::Index last = r.times.size() - 1;
  CHECK((r.states.row(last).transpose() - rotation_solution(x0, 1.0)).norm() <= 1e-6);
}

TEST_CASE("integration reports the step index when the state explodes") {
  GradientField blowup;
  blowup.eval = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(1e200 * (x.array() + 1.0)); };
  IntegrateOptions opts;
  opts.dt = 1e-2;
  opts.t_span = {0.0, 1.0};
  CHECK_THROWS_WITH_AS(integrate(oscillator(), blowup, constant_mode,
                                 Eigen::Vector2d(1.0, 1.0), zero_input(0), opts),
                       doctest::Contains("step"), std::runtime_error);
}

TEST_CASE("integration validates its arguments") {
  IntegrateOptions opts;
  opts.dt = -1.0;
  opts.t_span = {0.0, 1.0};
  CHECK_THROWS_AS(integrate(oscillator(), identity_field(), constant_mode,
                            Eigen::Vector2d(1, 0), zero_input(0), opts),
                  std::invalid_argument);
  opts.dt = 1e-2;
  opts.t_span = {1.0, 0.0};
  CHECK_THROWS_AS(integrate(oscillator(), identity_field(), constant_mode,
                            Eigen::Vector2d(1, 0), zero_input(0), opts),
                  std::invalid_argument);
}

TEST_CASE("zero-input energy drop equals the summed dissipation forms") {
  IntegrateOptions opts;
  opts.dt = 1e-3;
  opts.t_span = {0.0, 2.0};
  const SphsStructure st = oscillator(0.4);
  const GradientField grad = identity_field();
  const Rollout r = integrate(st, grad, constant_mode, Eigen::Vector2d(1.0, 0.5),
                              zero_input(0), opts);
  // With the first-order line-integral energy, each increment is exactly
  // -dt * grad^T R grad evaluated at the step point.
  for (Eigen::Index k = 0; k + 1 < r.times.size(); ++k) {
    const Eigen::VectorXd g = grad.eval(r.states.row(k));
    const double expected = -opts.dt * g.dot(st.R(1, r.states.row(k)) * g);
    CHECK(r.energy[k + 1] - r.energy[k] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("passivity audit is clean on a valid rollout and flags a flipped R") {
  IntegrateOptions opts;
  opts.dt = 1e-3;
  opts.t_span = {0.0, 2.0};
  const GradientField grad = identity_field();
  const Eigen::Vector2d x0(1.0, 0.0);

  const SphsStructure good = oscillator(0.3);
  const double c = calibrate_passivity_constant(good, grad, constant_mode, x0,
                                                zero_input(0), opts);
  const Rollout clean = integrate(good, grad, constant_mode, x0, zero_input(0), opts);
  const PassivityAudit clean_audit = passivity_audit(clean, c);
  CHECK(clean_audit.violations == 0);
  CHECK(clean_audit.worst_margin <= 0.0);

  SphsStructure bad = oscillator(0.3);
  bad.R = [](int, const Eigen::VectorXd&) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
    r(1, 1) = -0.3;  // injected fault: energy pump instead of dissipation
    return r;
  };
  const Rollout dirty = integrate(bad, grad, constant_mode, x0, zero_input(0), opts);
  const PassivityAudit dirty_audit = passivity_audit(dirty, c);
  CHECK(dirty_audit.violations > 0);
  CHECK(dirty_audit.worst_margin > 0.0);
}

TEST_CASE("energy continuity across switches obeys the same budget") {
  // Two modes with identical physics: switching cannot move energy.
  SphsStructure st = oscillator(0.2);
  st.n_modes = 2;
  auto policy = [](const Eigen::VectorXd& x) { return x[0] >= 0.0 ? 1 : 2; };
  IntegrateOptions opts;
  opts.dt = 1e-3;
  opts.t_span = {0.0, 3.0};
  const GradientField grad = identity_field();
  const Eigen::Vector2d x0(1.0, 0.0);
  const double c =
      calibrate_passivity_constant(st, grad, policy, x0, zero_input(0), opts);
  const Rollout r = integrate(st, grad, policy, x0, zero_input(0), opts);
  const PassivityAudit audit = passivity_audit(r, c);
  CHECK(audit.violations == 0);
  // A switch step's energy increment must look like any neighboring step's,
  // not a jump: the state is continuous and the energy is its line integral.
  int switch_steps = 0;
  for (Eigen::Index k = 1; k + 2 < r.times.size(); ++k) {
    if (r.modes[static_cast<size_t>(k + 1)] != r.modes[static_cast<size_t>(k)]) {
      ++switch_steps;
      const double dh = std::abs(r.energy[k + 1] - r.energy[k]);
      const double neighbors = std::max(std::abs(r.energy[k] - r.energy[k - 1]),
                                        std::abs(r.energy[k + 2] - r.energy[k + 1]));
      CHECK(dh <= 2.0 * neighbors + c * opts.dt * opts.dt);
    }
  }
  CHECK(switch_steps > 0);
}

TEST_CASE("pathwise samples of a prior-only model have the prior variance") {
  const KernelParams p = make_params(1.3, {1.0, 1.0});
  HamiltonianGP hgp;
  hgp.dims.push_back(fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), Eigen::VectorXd(0), p));
  const Eigen::Vector2d q(0.4, -0.9);
  const int draws = 500;
  double sum = 0.0, sum2 = 0.0;
  for (int seed = 0; seed < draws; ++seed) {
    const PathwiseSample s =
        sample_gradient_field(hgp, 1024, static_cast<std::uint64_t>(seed));
    const double v = s.eval(q)[0];
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  const double prior_var = 1.3 * 1.3;
  CHECK(std::abs(mean) <= 3.0 * std::sqrt(prior_var / draws));
  CHECK(std::abs(var - prior_var) <= 3.0 * prior_var * std::sqrt(2.0 / (draws - 1)));
}

TEST_CASE("pathwise sampling is deterministic per seed") {
  Rng rng(3);
  Eigen::MatrixXd x(10, 2);
  Eigen::VectorXd y(10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    x.row(i) = rng.normal_vector(2);
    y[i] = std::sin(x(i, 0)) + 0.1 * rng.normal();
  }
  HamiltonianGP hgp;
  hgp.dims.push_back(fit(x, y, Eigen::VectorXd::Constant(10, 0.01),
                         make_params(1.0, {0.7, 0.7})));
  const PathwiseSample a = sample_gradient_field(hgp, 512, 42);
  const PathwiseSample b = sample_gradient_field(hgp, 512, 42);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd q = rng.normal_vector(2);
    CHECK(a.eval(q) == b.eval(q));
  }
}

TEST_CASE("pathwise ensemble moments match the exact posterior") {
  Rng rng(7);
  const Eigen::Index n = 20;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  Eigen::VectorXd noise(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = rng.normal_vector(2);
    y[i] = 0.8 * x(i, 0) - 0.3 * x(i, 1) + 0.05 * rng.normal();
    noise[i] = rng.uniform(0.005, 0.05);
  }
  HamiltonianGP hgp;
  hgp.dims.push_back(fit(x, y, noise, make_params(1.1, {0.6, 0.9})));

  const Eigen::Vector2d q(0.3, 0.2);
  const PosteriorGaussian exact = hgp.dims[0].posterior(q);
  const int draws = 500;
  double sum = 0.0, sum2 = 0.0;
  for (int seed = 0; seed < draws; ++seed) {
    const double v =
        sample_gradient_field(hgp, 4096, static_cast<std::uint64_t>(seed)).eval(q)[0];
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(std::abs(mean - exact.mean) <= 3.0 * std::sqrt(var / draws));
  CHECK(std::abs(var - exact.variance) <=
        3.0 * std::max(var, exact.variance) * std::sqrt(2.0 / (draws - 1)));
}

TEST_CASE("rollout ensembles are deterministic and isolate per-sample failures") {
  // A classifier over a two-cluster fixture and a small gradient model give a
  // complete TrainedModel without running the full pipeline.
  Rng rng(11);
  Eigen::MatrixXd cx(8, 2);
  std::vector<int> cm;
  for (int i = 0; i < 8; ++i) {
    cx(i, 0) = (i < 4 ? -1.0 : 1.0) + 0.1 * rng.normal();
    cx(i, 1) = rng.normal();
    cm.push_back(i < 4 ? 1 : 2);
  }
  ClassifierOptions copts;
  copts.optimize.restarts = 1;
  copts.optimize.max_iterations = 10;

  TrainedModel model;
  model.classifier = train_classifier(cx, cm, copts, 5);
  Eigen::MatrixXd gx(6, 2);
  Eigen::VectorXd gy(6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    gx.row(i) = rng.normal_vector(2);
    gy[i] = -0.5 * gx(i, 0);
  }
  model.hamiltonian.dims.push_back(
      fit(gx, gy, Eigen::VectorXd::Constant(6, 0.01), make_params(1.0, {0.8, 0.8})));
  model.hamiltonian.dims.push_back(
      fit(gx, gy, Eigen::VectorXd::Constant(6, 0.01), make_params(1.0, {0.8, 0.8})));

  SphsStructure st = oscillator(0.1);
  st.n_modes = 2;
  IntegrateOptions opts;
  opts.dt = 1e-2;
  opts.t_span = {0.0, 1.0};
  const auto a = rollout_ensemble(model, st, Eigen::Vector2d(0.5, 0.0), zero_input(0),
                                  opts, 3, 256, 77);
  const auto b = rollout_ensemble(model, st, Eigen::Vector2d(0.5, 0.0), zero_input(0),
                                  opts, 3, 256, 77);
  REQUIRE(a.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    REQUIRE_FALSE(a[i].failed);
    CHECK(a[i].rollout.states == b[i].rollout.states);
    CHECK(a[i].rollout.energy == b[i].rollout.energy);
  }
  // Distinct samples differ.
  CHECK((a[0].rollout.states - a[1].rollout.states).norm() > 0.0);

  // A gradient model with an absurd signal amplitude overflows the sampled
  // feature weights; the failure is recorded per sample instead of aborting
  // the ensemble.
  TrainedModel broken = model;
  broken.hamiltonian.dims[0] =
      fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), Eigen::VectorXd(0),
          make_params(1e308, {0.8, 0.8}));
  const auto failed = rollout_ensemble(broken, st, Eigen::Vector2d(0.5, 0.0),
                                       zero_input(0), opts, 2, 64, 77);
  REQUIRE(failed.size() == 2);
  for (const auto& s : failed) {
    CHECK(s.failed);
    CHECK_FALSE(s.error.empty());
  }
}
