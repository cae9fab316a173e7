#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gpsphs/dataset_io.hpp"
#include "gpsphs/hopper.hpp"
#include "gpsphs/rng.hpp"

using namespace gpsphs;

namespace {

struct ContactFeatures {
  int intervals = 0;
  std::vector<double> peaks;  // flight apex before each later touchdown
};

ContactFeatures contact_features(const GroundTruthResult& truth) {
  ContactFeatures f;
  bool in_contact = false;
  double apex = -1e300;
  for (size_t i = 0; i < truth.modes.size(); ++i) {
    const bool contact = truth.modes[i] == kHopperContact;
    if (contact && !in_contact) {
      ++f.intervals;
      if (apex > -1e299) f.peaks.push_back(apex);
      apex = -1e300;
    }
    if (!contact) apex = std::max(apex, truth.states(static_cast<Eigen::Index>(i), 1));
    in_contact = contact;
  }
  return f;
}

}  // namespace

TEST_CASE("hopper structure decomposes into the expected skew and PSD parts") {
  const SphsStructure st = hopper_structure();
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(3);

  const Eigen::MatrixXd r_flight = st.R(kHopperFlight, x);
  CHECK(r_flight(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r_flight(1, 1) == 0.0);
  CHECK(r_flight(2, 2) == 0.0);

  const Eigen::MatrixXd r_contact = st.R(kHopperContact, x);
  CHECK(r_contact(0, 0) == 0.0);
  CHECK(r_contact(1, 1) == 0.0);
  CHECK(r_contact(2, 2) == doctest::Approx(2.0).epsilon(1e-15));

  const Eigen::MatrixXd j_flight = st.J(kHopperFlight, x);
  CHECK(j_flight(1, 2) == 1.0);
  CHECK(j_flight(2, 1) == -1.0);
  CHECK(j_flight(0, 2) == 0.0);
  const Eigen::MatrixXd j_contact = st.J(kHopperContact, x);
  CHECK(j_contact(0, 2) == 1.0);
  CHECK(j_contact(2, 0) == -1.0);
  CHECK(j_contact(1, 2) == 1.0);

  Rng rng(1);
  std::vector<Eigen::VectorXd> probes;
  for (int i = 0; i < 10; ++i) probes.push_back(rng.normal_vector(3));
  CHECK(validate_structure(st, probes, 1e-9).passed);

  // J - R reassembles the combined matrix of the dynamics.
  Eigen::Matrix3d combined_contact;
  combined_contact << 0, 0, 1, 0, 0, 1, -1, -1, -2;
  CHECK((st.J(kHopperContact, x) - st.R(kHopperContact, x) - combined_contact).norm() <=
        1e-14);
}

TEST_CASE("true Hamiltonian gradient at rest equals gravity only") {
  const HopperParams p;
  const GradientField h = hopper_true_hamiltonian(p);
  const Eigen::VectorXd g = h.eval(Eigen::Vector3d(p.rest_length, 0.0, 0.0));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(9.81).epsilon(1e-15));
  CHECK(g[2] == 0.0);
  // dH/dx3 = p / m with m = 1.
  CHECK(h.eval(Eigen::Vector3d(p.rest_length, 2.0, -1.7))[2] ==
        doctest::Approx(-1.7).epsilon(1e-15));
}

TEST_CASE("true Hamiltonian potential matches its gradient under finite differences") {
  const HopperParams p;
  const GradientField h = hopper_true_hamiltonian(p);
  Rng rng(3);
  const double step = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::Vector3d x(rng.uniform(0.1, 1.2), rng.uniform(0.0, 2.0), rng.uniform(-4.0, 4.0));
    for (int d = 0; d < 3; ++d) {
      Eigen::Vector3d xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      const double fd = (h.potential(xp) - h.potential(xm)) / (2.0 * step);
      CHECK(h.eval(x)[d] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("mode logic follows the hysteresis rules") {
  const HopperParams p;
  CHECK(hopper_mode_logic(p, Eigen::Vector3d(0.5, 1.5, 0.0), kHopperFlight) == kHopperFlight);
  CHECK(hopper_mode_logic(p, Eigen::Vector3d(0.5, 0.49, -1.0), kHopperFlight) ==
        kHopperContact);
  CHECK(hopper_mode_logic(p, Eigen::Vector3d(0.5, 0.5, 1.0), kHopperContact) ==
        kHopperContact);  // spring still compressed
  CHECK(hopper_mode_logic(p, Eigen::Vector3d(0.71, 0.71, 0.5), kHopperContact) ==
        kHopperFlight);  // past rest length moving up
  CHECK(hopper_mode_logic(p, Eigen::Vector3d(0.71, 0.71, -0.5), kHopperContact) ==
        kHopperContact);  // past rest length but moving down
}

TEST_CASE("canonical drop hops, decays, and settles in contact near rest") {
  const HopperParams p;
  const GroundTruthResult truth =
      simulate_hopper_truth(p, Eigen::Vector3d(0.7, 1.5, 0.0), {0.0, 5.0}, 1e-4);
  const ContactFeatures f = contact_features(truth);
  CHECK(f.intervals >= 3);
  for (size_t i = 1; i < f.peaks.size(); ++i) CHECK(f.peaks[i] < f.peaks[i - 1]);
  CHECK(truth.modes.back() == kHopperContact);
  const Eigen::Index last = truth.times.size() - 1;
  CHECK(std::abs(truth.states(last, 2)) <= 0.2);  // nearly at rest
  CHECK(truth.states(last, 1) == doctest::Approx(truth.states(last, 0)).epsilon(1e-9));
}

TEST_CASE("contact intervals keep the spring and body heights identical") {
  const HopperParams p;
  const GroundTruthResult truth =
      simulate_hopper_truth(p, Eigen::Vector3d(0.7, 1.5, 0.0), {0.0, 5.0}, 1e-4);
  for (Eigen::Index i = 0; i < truth.times.size(); ++i) {
    if (truth.modes[static_cast<size_t>(i)] == kHopperContact) {
      CHECK(std::abs(truth.states(i, 0) - truth.states(i, 1)) <= 1e-9);
    }
  }
}

TEST_CASE("ground-truth energy satisfies discrete passivity within the step budget") {
  const HopperParams p;
  const GradientField h = hopper_true_hamiltonian(p);
  // The budget constant is estimated by step halving: both grids must pass
  // with the same constant, confirming the dt^2 scaling.
  const SphsStructure st = hopper_structure(p);
  double constant = 0.0;
  for (double dt : {1e-4, 5e-5}) {
    const GroundTruthResult truth =
        simulate_hopper_truth(p, Eigen::Vector3d(0.7, 1.5, 0.0), {0.0, 5.0}, dt);
    for (Eigen::Index k = 0; k + 1 < truth.times.size(); ++k) {
      const double dh = h.potential(truth.states.row(k + 1)) -
                        h.potential(truth.states.row(k));
      const Eigen::VectorXd slope = (truth.states.row(k + 1) - truth.states.row(k)) / dt;
      const double margin = dh / (dt * dt * std::max(1.0, slope.squaredNorm()));
      constant = std::max(constant, margin);
    }
  }
  // The calibrated constant is O(1); a gross violation (an energy jump at a
  // switch) would inflate it by orders of magnitude.
  CHECK(constant <= 4.0);
}

TEST_CASE("generated dataset has the documented size, SNR, and labels") {
  const HopperParams p;
  DatasetConfig cfg;  // 20 trajectories, [0, 5), 0.1 s sampling
  const GeneratedDataset ds = generate_dataset(p, cfg, 1);
  CHECK(ds.data.size() == 1000);
  CHECK(ds.data.times.maxCoeff() == doctest::Approx(4.9).epsilon(1e-12));
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(ds.realized_snr_db[static_cast<size_t>(j)] -
                   cfg.snr_db[static_cast<size_t>(j)]) <= 0.5);
  }

  // Labels are noise-free: re-simulating each trajectory and re-applying the
  // mode logic on the fine grid reproduces them exactly.
  const Eigen::Index per_traj = 50;
  for (int traj = 0; traj < cfg.n_trajectories; traj += 7) {
    const Eigen::Index row0 = traj * per_traj;
    Eigen::Vector3d x0 = ds.noiseless_states.row(row0);
    const GroundTruthResult truth = simulate_hopper_truth(p, x0, cfg.t_span, cfg.fine_dt);
    // Hysteresis is self-consistent along the fine grid.
    for (size_t i = 1; i < truth.modes.size(); ++i) {
      CHECK(truth.modes[i] ==
            hopper_mode_logic(p, truth.states.row(static_cast<Eigen::Index>(i)),
                              truth.modes[i - 1]));
    }
    const Eigen::Index stride =
        static_cast<Eigen::Index>(std::llround(cfg.sample_dt / cfg.fine_dt));
    for (Eigen::Index i = 0; i < per_traj; ++i) {
      CHECK(ds.data.modes[static_cast<size_t>(row0 + i)] ==
            truth.modes[static_cast<size_t>(i * stride)]);
      CHECK((ds.noiseless_states.row(row0 + i) - truth.states.row(i * stride)).norm() <=
            1e-12);
    }
  }

  // All initial samples are flight-phase by the rejection rule.
  for (int traj = 0; traj < cfg.n_trajectories; ++traj) {
    CHECK(ds.data.modes[static_cast<size_t>(traj * per_traj)] == kHopperFlight);
  }
}

TEST_CASE("infinite SNR keeps the dataset noiseless and single trajectories count") {
  const HopperParams p;
  DatasetConfig cfg;
  cfg.n_trajectories = 1;
  cfg.snr_db = {std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
  const GeneratedDataset ds = generate_dataset(p, cfg, 5);
  CHECK(ds.data.size() == 50);
  CHECK((ds.data.states - ds.noiseless_states).norm() == 0.0);
}

TEST_CASE("dataset generation is byte-deterministic") {
  const HopperParams p;
  DatasetConfig cfg;
  cfg.n_trajectories = 2;
  const GeneratedDataset a = generate_dataset(p, cfg, 123);
  const GeneratedDataset b = generate_dataset(p, cfg, 123);
  CHECK(a.data.states == b.data.states);
  const std::string path_a = "/tmp/gpsphs_test_ds_a.csv";
  const std::string path_b = "/tmp/gpsphs_test_ds_b.csv";
  write_dataset_csv(a.data, path_a);
  write_dataset_csv(b.data, path_b);
  std::ifstream fa(path_a), fb(path_b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().size() > 0);
}
