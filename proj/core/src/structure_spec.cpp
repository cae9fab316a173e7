#include "gpsphs/structure_spec.hpp"

#include <sstream>
#include <stdexcept>

#include "gpsphs/ini.hpp"

namespace gpsphs {

SphsStructure StructureSpec::to_structure() const {
  if (kind == Kind::hopper) return hopper_structure(hopper);

  if (n <= 0 || m < 0 || n_modes <= 0) {
    throw std::invalid_argument("StructureSpec: invalid dimensions");
  }
  if (static_cast<int>(J.size()) != n_modes || static_cast<int>(R.size()) != n_modes) {
    throw std::invalid_argument("StructureSpec: need one J and one R per mode");
  }
  for (int s = 0; s < n_modes; ++s) {
    if (J[static_cast<size_t>(s)].rows() != n || J[static_cast<size_t>(s)].cols() != n ||
        R[static_cast<size_t>(s)].rows() != n || R[static_cast<size_t>(s)].cols() != n) {
      throw std::invalid_argument("StructureSpec: J/R matrices must be n x n");
    }
  }
  if (G.rows() != n || G.cols() != m) {
    throw std::invalid_argument("StructureSpec: G must be n x m");
  }

  SphsStructure st;
  st.n = n;
  st.m = m;
  st.n_modes = n_modes;
  const std::vector<Eigen::MatrixXd> j_mats = J;
  const std::vector<Eigen::MatrixXd> r_mats = R;
  const Eigen::MatrixXd g_mat = G;
  st.J = [j_mats](int mode, const Eigen::VectorXd&) {
    return j_mats[static_cast<size_t>(mode - 1)];
  };
  st.R = [r_mats](int mode, const Eigen::VectorXd&) {
    return r_mats[static_cast<size_t>(mode - 1)];
  };
  st.G = [g_mat](const Eigen::VectorXd&) { return g_mat; };
  return st;
}

StructureSpec parse_structure_file(const std::string& path) {
  const IniFile ini = IniFile::parse_file(path);

  StructureSpec spec;
  const std::string name = ini.get("structure", "name");
  if (name == "hopper") {
    spec.kind = StructureSpec::Kind::hopper;
    ini.require_known_sections({"structure", "hopper"});
    ini.require_known_keys("structure", {"name"});
    ini.require_known_keys("hopper", {"mass", "damping", "gravity", "rest_length", "stiffness",
                                      "stiffness_cubic"});
    if (ini.has_section("hopper")) {
      if (ini.has("hopper", "mass")) spec.hopper.mass = ini.get_double("hopper", "mass");
      if (ini.has("hopper", "damping")) spec.hopper.damping = ini.get_double("hopper", "damping");
      if (ini.has("hopper", "gravity")) spec.hopper.gravity = ini.get_double("hopper", "gravity");
      if (ini.has("hopper", "rest_length")) {
        spec.hopper.rest_length = ini.get_double("hopper", "rest_length");
      }
      if (ini.has("hopper", "stiffness")) {
        spec.hopper.stiffness = ini.get_double("hopper", "stiffness");
      }
      if (ini.has("hopper", "stiffness_cubic")) {
        spec.hopper.stiffness_cubic = ini.get_double("hopper", "stiffness_cubic");
      }
    }
    return spec;
  }
  if (name != "constant") {
    throw std::runtime_error(path + ": unknown structure name '" + name +
                             "' (expected 'hopper' or 'constant')");
  }

  spec.kind = StructureSpec::Kind::constant;
  ini.require_known_keys("structure", {"name", "n", "m", "modes"});
  spec.n = static_cast<int>(ini.get_int("structure", "n"));
  spec.m = static_cast<int>(ini.get_int("structure", "m"));
  spec.n_modes = static_cast<int>(ini.get_int("structure", "modes"));

  std::vector<std::string> allowed = {"structure", "matrices"};
  ini.require_known_sections(allowed);
  std::vector<std::string> keys = {"G"};
  for (int s = 1; s <= spec.n_modes; ++s) {
    std::ostringstream jk, rk;
    jk << "J" << s;
    rk << "R" << s;
    keys.push_back(jk.str());
    keys.push_back(rk.str());
  }
  ini.require_known_keys("matrices", keys);

  for (int s = 1; s <= spec.n_modes; ++s) {
    std::ostringstream jk, rk;
    jk << "J" << s;
    rk << "R" << s;
    spec.J.push_back(ini.get_matrix("matrices", jk.str()));
    spec.R.push_back(ini.get_matrix("matrices", rk.str()));
  }
  if (spec.m > 0) {
    spec.G = ini.get_matrix("matrices", "G");
  } else {
    spec.G = Eigen::MatrixXd::Zero(spec.n, 0);
  }
  spec.to_structure();  // dimension validation
  return spec;
}

}  // namespace gpsphs
