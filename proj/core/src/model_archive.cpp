#include "gpsphs/model_archive.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gpsphs {

namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& a, Eigen::Index cols_if_empty = 0) {
  if (a.empty()) return Eigen::MatrixXd(0, cols_if_empty);
  const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(a[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = a[static_cast<size_t>(i)][static_cast<size_t>(j)].get<double>();
    }
  }
  return m;
}

json params_to_json(const KernelParams& p) {
  return json{{"signal_std", p.signal_std}, {"lengthscale_diag", to_json(p.lengthscale_diag)}};
}

KernelParams params_from_json(const json& j) {
  KernelParams p;
  p.signal_std = j.at("signal_std").get<double>();
  p.lengthscale_diag = vector_from_json(j.at("lengthscale_diag"));
  return p;
}

json structure_to_json(const StructureSpec& spec) {
  json j;
  if (spec.kind == StructureSpec::Kind::hopper) {
    j["kind"] = "hopper";
    j["hopper"] = json{{"mass", spec.hopper.mass},
                       {"damping", spec.hopper.damping},
                       {"gravity", spec.hopper.gravity},
                       {"rest_length", spec.hopper.rest_length},
                       {"stiffness", spec.hopper.stiffness},
                       {"stiffness_cubic", spec.hopper.stiffness_cubic}};
    return j;
  }
  j["kind"] = "constant";
  j["n"] = spec.n;
  j["m"] = spec.m;
  j["n_modes"] = spec.n_modes;
  json jj = json::array(), rr = json::array();
  for (const auto& m : spec.J) jj.push_back(to_json(m));
  for (const auto& m : spec.R) rr.push_back(to_json(m));
  j["J"] = std::move(jj);
  j["R"] = std::move(rr);
  j["G"] = to_json(spec.G);
  return j;
}

StructureSpec structure_from_json(const json& j) {
  StructureSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hopper") {
    spec.kind = StructureSpec::Kind::hopper;
    const json& h = j.at("hopper");
    spec.hopper.mass = h.at("mass").get<double>();
    spec.hopper.damping = h.at("damping").get<double>();
    spec.hopper.gravity = h.at("gravity").get<double>();
    spec.hopper.rest_length = h.at("rest_length").get<double>();
    spec.hopper.stiffness = h.at("stiffness").get<double>();
    spec.hopper.stiffness_cubic = h.at("stiffness_cubic").get<double>();
    return spec;
  }
  if (kind != "constant") throw std::runtime_error("model archive: unknown structure kind");
  spec.kind = StructureSpec::Kind::constant;
  spec.n = j.at("n").get<int>();
  spec.m = j.at("m").get<int>();
  spec.n_modes = j.at("n_modes").get<int>();
  for (const auto& m : j.at("J")) spec.J.push_back(matrix_from_json(m));
  for (const auto& m : j.at("R")) spec.R.push_back(matrix_from_json(m));
  spec.G = matrix_from_json(j.at("G"), spec.m);
  return spec;
}

}  // namespace

std::string model_archive_to_json(const ModelArchive& archive) {
  const TrainedModel& model = archive.model;
  json j;
  j["format_version"] = ModelArchive::kFormatVersion;
  j["seed"] = model.seed;
  j["policy_feature_count"] = model.policy_feature_count;
  j["structure"] = structure_to_json(archive.structure);

  json dims = json::array();
  for (const auto& gp : model.hamiltonian.dims) {
    dims.push_back(json{{"inputs", to_json(gp.inputs)},
                        {"targets", to_json(gp.targets)},
                        {"noise", to_json(gp.noise)},
                        {"kernel", params_to_json(gp.params)}});
  }
  j["hamiltonian"] = json{{"dims", std::move(dims)}};

  json classes = json::array();
  for (const auto& cls : model.classifier.classes) {
    classes.push_back(json{{"mode_id", cls.mode_id}, {"kernel", params_to_json(cls.params)}});
  }
  j["classifier"] = json{{"n_modes", model.classifier.n_modes},
                         {"inputs", to_json(model.classifier.inputs)},
                         {"modes", model.classifier.modes},
                         {"classes", std::move(classes)}};

  json diag;
  json surrogate = json::array();
  for (const auto& d : model.surrogate_diagnostics) {
    surrogate.push_back(json{{"trajectory_id", d.trajectory_id},
                             {"dim", d.dim},
                             {"kernel", params_to_json(d.params)},
                             {"noise_variance", d.noise_variance},
                             {"nlml", d.nlml},
                             {"gradient_norm", d.gradient_norm},
                             {"iterations", d.iterations},
                             {"converged", d.converged}});
  }
  diag["surrogate"] = std::move(surrogate);
  json points = json::array();
  for (const auto p : model.points_per_dim) points.push_back(p);
  diag["points_per_dim"] = std::move(points);
  diag["training_accuracy"] = model.training_accuracy;
  json hdiag = json::array();
  for (const auto& d : model.hamiltonian.diagnostics) {
    hdiag.push_back(json{{"n_points", d.n_points},
                         {"kernel", params_to_json(d.params)},
                         {"nlml", d.nlml},
                         {"gradient_norm", d.gradient_norm},
                         {"iterations", d.iterations},
                         {"converged", d.converged}});
  }
  diag["hamiltonian"] = std::move(hdiag);
  j["diagnostics"] = std::move(diag);

  return j.dump(1) + "\n";
}

ModelArchive model_archive_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int version = j.at("format_version").get<int>();
  if (version != ModelArchive::kFormatVersion) {
    std::ostringstream os;
    os << "model archive: unsupported format version " << version << " (expected "
       << ModelArchive::kFormatVersion << ")";
    throw std::runtime_error(os.str());
  }

  ModelArchive archive;
  archive.structure = structure_from_json(j.at("structure"));
  TrainedModel& model = archive.model;
  model.seed = j.at("seed").get<std::uint64_t>();
  model.policy_feature_count = j.at("policy_feature_count").get<int>();

  for (const auto& d : j.at("hamiltonian").at("dims")) {
    const Eigen::MatrixXd inputs = matrix_from_json(d.at("inputs"));
    const Eigen::VectorXd targets = vector_from_json(d.at("targets"));
    const Eigen::VectorXd noise = vector_from_json(d.at("noise"));
    const KernelParams params = params_from_json(d.at("kernel"));
    model.hamiltonian.dims.push_back(fit(inputs, targets, noise, params));
  }

  const json& jc = j.at("classifier");
  model.classifier.inputs = matrix_from_json(jc.at("inputs"));
  model.classifier.modes = jc.at("modes").get<std::vector<int>>();
  model.classifier.n_modes = jc.at("n_modes").get<int>();
  for (const auto& c : jc.at("classes")) {
    LaplaceClass cls;
    cls.mode_id = c.at("mode_id").get<int>();
    cls.params = params_from_json(c.at("kernel"));
    cls.labels.resize(model.classifier.inputs.rows());
    for (Eigen::Index i = 0; i < cls.labels.size(); ++i) {
      cls.labels[i] =
          model.classifier.modes[static_cast<size_t>(i)] == cls.mode_id ? 1.0 : -1.0;
    }
    model.classifier.classes.push_back(std::move(cls));
  }
  model.classifier.rebuild();

  const json& diag = j.at("diagnostics");
  for (const auto& d : diag.at("surrogate")) {
    SurrogateDiagnostics s;
    s.trajectory_id = d.at("trajectory_id").get<int>();
    s.dim = d.at("dim").get<int>();
    s.params = params_from_json(d.at("kernel"));
    s.noise_variance = d.at("noise_variance").get<double>();
    s.nlml = d.at("nlml").get<double>();
    s.gradient_norm = d.at("gradient_norm").get<double>();
    s.iterations = d.at("iterations").get<int>();
    s.converged = d.at("converged").get<bool>();
    model.surrogate_diagnostics.push_back(s);
  }
  for (const auto& p : diag.at("points_per_dim")) {
    model.points_per_dim.push_back(p.get<Eigen::Index>());
  }
  model.training_accuracy = diag.at("training_accuracy").get<double>();
  for (const auto& d : diag.at("hamiltonian")) {
    HamiltonianDimDiagnostics h;
    h.n_points = d.at("n_points").get<Eigen::Index>();
    h.params = params_from_json(d.at("kernel"));
    h.nlml = d.at("nlml").get<double>();
    h.gradient_norm = d.at("gradient_norm").get<double>();
    h.iterations = d.at("iterations").get<int>();
    h.converged = d.at("converged").get<bool>();
    model.hamiltonian.diagnostics.push_back(h);
  }
  return archive;
}

void save_model_archive(const ModelArchive& archive, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << model_archive_to_json(archive);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelArchive load_model_archive(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_archive_from_json(buffer.str());
}

}  // namespace gpsphs
