#include "gpsphs/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gpsphs {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& path, size_t line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << path << ":" << line_no << ": cannot parse number '" << s << "'";
    throw std::runtime_error(os.str());
  }
}

int parse_int(const std::string& s, const std::string& path, size_t line_no) {
  const double v = parse_double(s, path, line_no);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    std::ostringstream os;
    os << path << ":" << line_no << ": expected integer, got '" << s << "'";
    throw std::runtime_error(os.str());
  }
  return i;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

void write_dataset_csv(const TrajectoryDataset& dataset, const std::string& path) {
  std::ofstream out = open_for_write(path);
  const Eigen::Index n = dataset.state_dim();
  out << "trajectory_id,t";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j + 1;
  out << ",s\n";
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    out << dataset.trajectory_ids[static_cast<size_t>(i)] << ","
        << format_number(dataset.times[i]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_number(dataset.states(i, j));
    out << "," << dataset.modes[static_cast<size_t>(i)] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrajectoryDataset read_dataset_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");

  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 4 || header[0] != "trajectory_id" || header[1] != "t" ||
      header.back() != "s") {
    throw std::runtime_error(path + ":1: expected header trajectory_id,t,x1,...,s");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 3;
  for (Eigen::Index j = 0; j < n; ++j) {
    std::ostringstream expect;
    expect << "x" << j + 1;
    if (header[static_cast<size_t>(j + 2)] != expect.str()) {
      throw std::runtime_error(path + ":1: unexpected state column '" +
                               header[static_cast<size_t>(j + 2)] + "'");
    }
  }

  std::vector<std::string> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (!lines[i].empty()) rows.push_back(lines[i]);
  }
  TrajectoryDataset ds;
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  ds.times.resize(n_rows);
  ds.states.resize(n_rows, n);
  ds.inputs.resize(n_rows, 0);
  ds.modes.resize(static_cast<size_t>(n_rows));
  ds.trajectory_ids.resize(static_cast<size_t>(n_rows));
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const size_t line_no = static_cast<size_t>(i) + 2;
    const std::vector<std::string> f = split_csv_line(rows[static_cast<size_t>(i)]);
    if (f.size() != header.size()) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected " << header.size() << " columns, got "
         << f.size();
      throw std::runtime_error(os.str());
    }
    ds.trajectory_ids[static_cast<size_t>(i)] = parse_int(f[0], path, line_no);
    ds.times[i] = parse_double(f[1], path, line_no);
    for (Eigen::Index j = 0; j < n; ++j) {
      ds.states(i, j) = parse_double(f[static_cast<size_t>(j + 2)], path, line_no);
    }
    ds.modes[static_cast<size_t>(i)] = parse_int(f.back(), path, line_no);
  }
  ds.validate();
  return ds;
}

void write_rollout_csv(const Rollout& rollout, const std::string& path) {
  std::ofstream out = open_for_write(path);
  const Eigen::Index n = rollout.states.cols();
  out << "t";
  for (Eigen::Index j = 0; j < n; ++j) out << ",x" << j + 1;
  out << ",mode,H,supply\n";
  for (Eigen::Index i = 0; i < rollout.times.size(); ++i) {
    out << format_number(rollout.times[i]);
    for (Eigen::Index j = 0; j < n; ++j) out << "," << format_number(rollout.states(i, j));
    out << "," << rollout.modes[static_cast<size_t>(i)] << ","
        << format_number(rollout.energy[i]) << "," << format_number(rollout.supply[i]) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Rollout read_rollout_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 4 || header[0] != "t" || header.back() != "supply") {
    throw std::runtime_error(path + ":1: expected header t,x1,...,mode,H,supply");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(header.size()) - 4;

  std::vector<std::string> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (!lines[i].empty()) rows.push_back(lines[i]);
  }
  Rollout r;
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  r.times.resize(n_rows);
  r.states.resize(n_rows, n);
  r.modes.resize(static_cast<size_t>(n_rows));
  r.energy.resize(n_rows);
  r.supply.resize(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const size_t line_no = static_cast<size_t>(i) + 2;
    const std::vector<std::string> f = split_csv_line(rows[static_cast<size_t>(i)]);
    if (f.size() != header.size()) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected " << header.size() << " columns, got "
         << f.size();
      throw std::runtime_error(os.str());
    }
    r.times[i] = parse_double(f[0], path, line_no);
    for (Eigen::Index j = 0; j < n; ++j) {
      r.states(i, j) = parse_double(f[static_cast<size_t>(j + 1)], path, line_no);
    }
    r.modes[static_cast<size_t>(i)] = parse_int(f[f.size() - 3], path, line_no);
    r.energy[i] = parse_double(f[f.size() - 2], path, line_no);
    r.supply[i] = parse_double(f[f.size() - 1], path, line_no);
  }
  if (n_rows >= 2) r.dt = r.times[1] - r.times[0];
  return r;
}

}  // namespace gpsphs
