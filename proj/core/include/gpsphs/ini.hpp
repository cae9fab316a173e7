#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpsphs {

/// Minimal sectioned key-value reader for config and model-definition files:
/// `[section]` headers, `key = value` lines, `#` comments, blank lines.
class IniFile {
 public:
  static IniFile parse_string(const std::string& text, const std::string& name) {
    IniFile ini;
    ini.name_ = name;
    std::istringstream is(text);
    std::string line;
    std::string section;
    size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(name, line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(name, line_no, "empty section name");
        ini.sections_[section];
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) fail(name, line_no, "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(name, line_no, "empty key");
      if (section.empty()) fail(name, line_no, "key outside any section");
      ini.sections_[section][key] = value;
    }
    return ini;
  }

  static IniFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
  }

  bool has_section(const std::string& section) const {
    return sections_.find(section) != sections_.end();
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.find(key) != s->second.end();
  }

  const std::string& get(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) throw std::runtime_error(name_ + ": missing section [" + section + "]");
    const auto k = s->second.find(key);
    if (k == s->second.end()) {
      throw std::runtime_error(name_ + ": missing key '" + key + "' in [" + section + "]");
    }
    return k->second;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return to_double(get(section, key), section, key);
  }

  long get_int(const std::string& section, const std::string& key) const {
    const double v = get_double(section, key);
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) {
      throw std::runtime_error(name_ + ": [" + section + "] " + key + " must be an integer");
    }
    return i;
  }

  std::vector<double> get_vector(const std::string& section, const std::string& key) const {
    std::istringstream is(get(section, key));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(tok, section, key));
    return out;
  }

  /// Matrix rows separated by ';', entries by whitespace.
  Eigen::MatrixXd get_matrix(const std::string& section, const std::string& key) const {
    const std::string& text = get(section, key);
    std::vector<std::vector<double>> rows;
    std::string row_text;
    std::istringstream row_stream(text);
    while (std::getline(row_stream, row_text, ';')) {
      std::istringstream is(row_text);
      std::vector<double> row;
      std::string tok;
      while (is >> tok) row.push_back(to_double(tok, section, key));
      if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) {
      throw std::runtime_error(name_ + ": [" + section + "] " + key + " is an empty matrix");
    }
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size()) {
        throw std::runtime_error(name_ + ": [" + section + "] " + key + " has ragged rows");
      }
      for (size_t j = 0; j < rows[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    return m;
  }

  /// Rejects keys outside `allowed` within `section`; missing section is fine.
  void require_known_keys(const std::string& section,
                          const std::vector<std::string>& allowed) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, value] : s->second) {
      bool known = false;
      for (const auto& a : allowed) {
        if (a == key) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw std::runtime_error(name_ + ": unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  void require_known_sections(const std::vector<std::string>& allowed) const {
    for (const auto& [section, kv] : sections_) {
      bool known = false;
      for (const auto& a : allowed) {
        if (a == section) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw std::runtime_error(name_ + ": unknown section [" + section + "]");
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

  [[noreturn]] static void fail(const std::string& name, size_t line_no, const std::string& what) {
    std::ostringstream os;
    os << name << ":" << line_no << ": " << what;
    throw std::runtime_error(os.str());
  }

  double to_double(const std::string& s, const std::string& section, const std::string& key) const {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    try {
      size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(name_ + ": [" + section + "] " + key + ": bad number '" + s + "'");
    }
  }

  std::string name_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace gpsphs
