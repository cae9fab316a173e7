#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gpsphs {

/// Switching Port-Hamiltonian structure: per-mode interconnection J (skew)
/// and dissipation R (symmetric PSD), shared port matrix G. Modes are
/// 1-based ids in {1, ..., n_modes}. All callables must be pure.
struct SphsStructure {
  int n = 0;        // state dimension
  int m = 0;        // port dimension
  int n_modes = 1;
  std::function<Eigen::MatrixXd(int mode, const Eigen::VectorXd& x)> J;
  std::function<Eigen::MatrixXd(int mode, const Eigen::VectorXd& x)> R;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& x)> G;

  void check_mode(int mode) const;
};

/// Gradient of an energy function, optionally with the energy itself.
struct GradientField {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
  std::function<double(const Eigen::VectorXd&)> potential;  // may be empty

  bool has_potential() const { return static_cast<bool>(potential); }
};

struct PortSignal {
  Eigen::VectorXd u;
  Eigen::VectorXd y;
};

/// State derivative [J_s(x) - R_s(x)] grad(x) + G(x) u.
Eigen::VectorXd rhs(const SphsStructure& structure, const GradientField& grad, int mode,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& u);

/// Port output y = G(x)^T grad(x).
Eigen::VectorXd output_port(const SphsStructure& structure, const GradientField& grad,
                            const Eigen::VectorXd& x);

struct StructureValidation {
  struct ModeReport {
    int mode = 0;
    double max_skew_violation = 0.0;  // max |J + J^T| entry over samples
    double max_r_asymmetry = 0.0;     // max |R - R^T| entry over samples
    double min_r_eigenvalue = 0.0;    // min eigenvalue of sym(R) over samples
  };
  std::vector<ModeReport> modes;
  double tolerance = 0.0;
  bool passed = false;
};

/// Checks J skew-symmetry and R positive semidefiniteness for every mode at
/// every sample state. Report-only; never throws on violations.
StructureValidation validate_structure(const SphsStructure& structure,
                                       const std::vector<Eigen::VectorXd>& sample_states,
                                       double tolerance = 1e-9);

struct DissipationRate {
  double h_dot = 0.0;   // grad^T rhs
  double supply = 0.0;  // u^T y
};

DissipationRate dissipation_rate(const SphsStructure& structure, const GradientField& grad,
                                 int mode, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

/// Columns of G used for the negative-feedback coupling; remaining columns
/// stay external, in their original order.
struct PortSelection {
  std::vector<int> connected;  // 0-based column indices, distinct
};

struct InterconnectedSystem {
  SphsStructure structure;
  GradientField gradient;
};

/// Negative-feedback interconnection u1c = -y2c, u2c = y1c of two systems
/// through m_c selected port columns each. The composed system has state
/// [x; xi], block J with off-diagonal coupling -G1c G2c^T, block-diagonal R,
/// block-diagonal external G, mode ids (s1-1)*n_modes2 + s2, and the
/// concatenated gradient field.
InterconnectedSystem interconnect(const SphsStructure& s1, const GradientField& g1,
                                  const SphsStructure& s2, const GradientField& g2,
                                  const PortSelection& ports1, const PortSelection& ports2);

}  // namespace gpsphs
