#ifndef SVGOF_CONFIG_HPP
#define SVGOF_CONFIG_HPP

// Flat key-value run configuration with [section] headers, `#` or `;`
// comments. Every key read through ConfigView is recorded together with
// the value actually used (explicit or default) so the manifest lists
// the fully resolved configuration.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace svgof {

struct Config {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline Config parse_config_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    cfg.sections[section][key] = val;
  }
  return cfg;
}

inline Config parse_config_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config file: " + file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Time-step conventions: named (weekly = 1/52, daily = 1/252), a literal
// fraction "a/b", or a decimal.
inline double parse_dt(const std::string& s) {
  if (s == "weekly") return 1.0 / 52.0;
  if (s == "daily") return 1.0 / 252.0;
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(s.substr(0, slash));
      const double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw std::runtime_error("zero denominator");
      return num / den;
    }
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse time step: " + s);
  }
}

class ConfigView {
 public:
  explicit ConfigView(const Config& cfg) : cfg_(&cfg) {}

  std::string get(const std::string& sec, const std::string& key,
                  const std::string& def) const {
    std::string v = def;
    const auto s = cfg_->sections.find(sec);
    if (s != cfg_->sections.end()) {
      const auto k = s->second.find(key);
      if (k != s->second.end()) v = k->second;
    }
    resolved_[sec + "." + key] = v;
    return v;
  }

  std::string require(const std::string& sec, const std::string& key) const {
    const auto s = cfg_->sections.find(sec);
    if (s == cfg_->sections.end() || !s->second.count(key))
      throw std::runtime_error("missing required config key [" + sec + "] " +
                               key);
    const std::string v = s->second.at(key);
    resolved_[sec + "." + key] = v;
    return v;
  }

  double num(const std::string& sec, const std::string& key, double def) const {
    const std::string v = get(sec, key, fmtnum(def));
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw std::runtime_error("config [" + sec + "] " + key +
                               ": cannot parse number: " + v);
    }
  }

  long integer(const std::string& sec, const std::string& key, long def) const {
    const std::string v = get(sec, key, std::to_string(def));
    try {
      return std::stol(v);
    } catch (const std::exception&) {
      throw std::runtime_error("config [" + sec + "] " + key +
                               ": cannot parse integer: " + v);
    }
  }

  std::uint64_t u64(const std::string& sec, const std::string& key,
                    std::uint64_t def) const {
    const std::string v = get(sec, key, std::to_string(def));
    try {
      return std::stoull(v);
    } catch (const std::exception&) {
      throw std::runtime_error("config [" + sec + "] " + key +
                               ": cannot parse integer: " + v);
    }
  }

  bool flag(const std::string& sec, const std::string& key, bool def) const {
    const std::string v = get(sec, key, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config [" + sec + "] " + key +
                             ": expected boolean, got: " + v);
  }

  double dt(const std::string& sec, const std::string& key,
            const std::string& def) const {
    return parse_dt(get(sec, key, def));
  }

  std::vector<std::string> list(const std::string& sec, const std::string& key,
                                const std::string& def) const {
    const std::string v = get(sec, key, def);
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }

  void note(const std::string& key, const std::string& value) const {
    resolved_[key] = value;
  }

 private:
  static std::string fmtnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  const Config* cfg_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace svgof

#endif  // SVGOF_CONFIG_HPP
