#include "gpsphs/sphs.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace gpsphs {

void SphsStructure::check_mode(int mode) const {
  if (mode < 1 || mode > n_modes) {
    std::ostringstream os;
    os << "invalid mode " << mode << ", expected 1.." << n_modes;
    throw std::invalid_argument(os.str());
  }
}

Eigen::VectorXd rhs(const SphsStructure& structure, const GradientField& grad, int mode,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  structure.check_mode(mode);
  if (x.size() != structure.n) throw std::invalid_argument("rhs: state dimension mismatch");
  if (u.size() != structure.m) throw std::invalid_argument("rhs: input dimension mismatch");
  const Eigen::VectorXd g = grad.eval(x);
  Eigen::VectorXd out = (structure.J(mode, x) - structure.R(mode, x)) * g;
  if (structure.m > 0) out += structure.G(x) * u;
  return out;
}

Eigen::VectorXd output_port(const SphsStructure& structure, const GradientField& grad,
                            const Eigen::VectorXd& x) {
  if (x.size() != structure.n) {
    throw std::invalid_argument("output_port: state dimension mismatch");
  }
  if (structure.m == 0) return Eigen::VectorXd(0);
  return structure.G(x).transpose() * grad.eval(x);
}

StructureValidation validate_structure(const SphsStructure& structure,
                                       const std::vector<Eigen::VectorXd>& sample_states,
                                       double tolerance) {
  if (sample_states.empty()) {
    throw std::invalid_argument("validate_structure: empty sample set");
  }
  StructureValidation report;
  report.tolerance = tolerance;
  report.passed = true;
  for (int mode = 1; mode <= structure.n_modes; ++mode) {
    StructureValidation::ModeReport mr;
    mr.mode = mode;
    mr.min_r_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& x : sample_states) {
      const Eigen::MatrixXd j = structure.J(mode, x);
      const Eigen::MatrixXd r = structure.R(mode, x);
      mr.max_skew_violation =
          std::max(mr.max_skew_violation, (j + j.transpose()).cwiseAbs().maxCoeff());
      mr.max_r_asymmetry =
          std::max(mr.max_r_asymmetry, (r - r.transpose()).cwiseAbs().maxCoeff());
      const Eigen::MatrixXd r_sym = 0.5 * (r + r.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r_sym, Eigen::EigenvaluesOnly);
      mr.min_r_eigenvalue = std::min(mr.min_r_eigenvalue, es.eigenvalues().minCoeff());
    }
    if (mr.max_skew_violation > tolerance || mr.max_r_asymmetry > tolerance ||
        mr.min_r_eigenvalue < -tolerance) {
      report.passed = false;
    }
    report.modes.push_back(mr);
  }
  return report;
}

DissipationRate dissipation_rate(const SphsStructure& structure, const GradientField& grad,
                                 int mode, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  DissipationRate d;
  d.h_dot = grad.eval(x).dot(rhs(structure, grad, mode, x, u));
  d.supply = structure.m > 0 ? u.dot(output_port(structure, grad, x)) : 0.0;
  return d;
}

namespace {

std::vector<int> complement_columns(const std::vector<int>& selected, int m) {
  std::vector<int> rest;
  for (int c = 0; c < m; ++c) {
    if (std::find(selected.begin(), selected.end(), c) == selected.end()) rest.push_back(c);
  }
  return rest;
}

Eigen::MatrixXd pick_columns(const Eigen::MatrixXd& g, const std::vector<int>& cols) {
  Eigen::MatrixXd out(g.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = g.col(cols[i]);
  return out;
}

void check_ports(const PortSelection& ports, int m, const char* which) {
  std::set<int> seen;
  for (int c : ports.connected) {
    if (c < 0 || c >= m) {
      std::ostringstream os;
      os << "interconnect: " << which << " port column " << c << " out of range 0.." << m - 1;
      throw std::invalid_argument(os.str());
    }
    if (!seen.insert(c).second) {
      std::ostringstream os;
      os << "interconnect: " << which << " port selection overlaps at column " << c;
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

InterconnectedSystem interconnect(const SphsStructure& s1, const GradientField& g1,
                                  const SphsStructure& s2, const GradientField& g2,
                                  const PortSelection& ports1, const PortSelection& ports2) {
  if (ports1.connected.size() != ports2.connected.size()) {
    throw std::invalid_argument("interconnect: port selections must have equal size");
  }
  const int mc = static_cast<int>(ports1.connected.size());
  if (mc > std::min(s1.m, s2.m)) {
    throw std::invalid_argument("interconnect: connection dimension exceeds a port dimension");
  }
  check_ports(ports1, s1.m, "system 1");
  check_ports(ports2, s2.m, "system 2");

  const std::vector<int> ext1 = complement_columns(ports1.connected, s1.m);
  const std::vector<int> ext2 = complement_columns(ports2.connected, s2.m);
  const std::vector<int> con1 = ports1.connected;
  const std::vector<int> con2 = ports2.connected;

  const int n1 = s1.n;
  const int n2 = s2.n;
  const int ns2 = s2.n_modes;

  SphsStructure out;
  out.n = n1 + n2;
  out.m = static_cast<int>(ext1.size() + ext2.size());
  out.n_modes = s1.n_modes * s2.n_modes;

  auto split_modes = [ns2](int mode) {
    const int s1_mode = (mode - 1) / ns2 + 1;
    const int s2_mode = (mode - 1) % ns2 + 1;
    return std::pair<int, int>(s1_mode, s2_mode);
  };

  out.J = [s1, s2, con1, con2, n1, n2, split_modes](int mode, const Eigen::VectorXd& z) {
    const auto [m1, m2] = split_modes(mode);
    const Eigen::VectorXd x = z.head(n1);
    const Eigen::VectorXd xi = z.tail(n2);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    j.topLeftCorner(n1, n1) = s1.J(m1, x);
    j.bottomRightCorner(n2, n2) = s2.J(m2, xi);
    const Eigen::MatrixXd g1c = pick_columns(s1.G(x), con1);
    const Eigen::MatrixXd g2c = pick_columns(s2.G(xi), con2);
    j.topRightCorner(n1, n2) = -g1c * g2c.transpose();
    j.bottomLeftCorner(n2, n1) = g2c * g1c.transpose();
    return j;
  };
  out.R = [s1, s2, n1, n2, split_modes](int mode, const Eigen::VectorXd& z) {
    const auto [m1, m2] = split_modes(mode);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    r.topLeftCorner(n1, n1) = s1.R(m1, z.head(n1));
    r.bottomRightCorner(n2, n2) = s2.R(m2, z.tail(n2));
    return r;
  };
  out.G = [s1, s2, ext1, ext2, n1, n2](const Eigen::VectorXd& z) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(
        n1 + n2, static_cast<Eigen::Index>(ext1.size() + ext2.size()));
    if (!ext1.empty()) {
      g.block(0, 0, n1, static_cast<Eigen::Index>(ext1.size())) =
          pick_columns(s1.G(z.head(n1)), ext1);
    }
    if (!ext2.empty()) {
      g.block(n1, static_cast<Eigen::Index>(ext1.size()), n2,
              static_cast<Eigen::Index>(ext2.size())) = pick_columns(s2.G(z.tail(n2)), ext2);
    }
    return g;
  };

  InterconnectedSystem sys;
  sys.structure = std::move(out);
  sys.gradient.eval = [g1, g2, n1, n2](const Eigen::VectorXd& z) {
    Eigen::VectorXd g(n1 + n2);
    g.head(n1) = g1.eval(z.head(n1));
    g.tail(n2) = g2.eval(z.tail(n2));
    return g;
  };
  if (g1.has_potential() && g2.has_potential()) {
    sys.gradient.potential = [g1, g2, n1, n2](const Eigen::VectorXd& z) {
      return g1.potential(z.head(n1)) + g2.potential(z.tail(n2));
    };
  }
  return sys;
}

}  // namespace gpsphs
