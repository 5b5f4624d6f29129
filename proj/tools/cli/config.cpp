#include "cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nonholib/errors.hpp"

namespace nonholib::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Method parse_method(const std::string& s) {
  if (s == "rk4") return Method::RK4;
  if (s == "rkf45") return Method::RKF45;
  throw InvalidConfig("integrator.method must be rk4 or rkf45, got '" + s + "'");
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::NH: return "nh";
    case Model::Friction: return "friction";
    case Model::Corrected: return "corrected";
    case Model::Fast: return "fast";
  }
  return "?";
}

Model parse_model(const std::string& s) {
  if (s == "nh") return Model::NH;
  if (s == "friction") return Model::Friction;
  if (s == "corrected") return Model::Corrected;
  if (s == "fast") return Model::Fast;
  throw InvalidConfig("model must be one of nh, friction, corrected, fast; got '" + s + "'");
}

double parse_double(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t.empty()) throw InvalidConfig("empty value for " + key);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw InvalidConfig("cannot parse '" + t + "' as a number for " + key);
  return v;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  if (out.empty()) throw InvalidConfig("empty list for " + key);
  return out;
}

KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path);
  return parse_key_values(in, path);
}

ExperimentConfig build_config(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.echo = kv;
  for (const auto& [key, value] : kv) {
    if (key == "system") {
      cfg.system = value;
    } else if (key == "model") {
      cfg.model = parse_model(value);
    } else if (key == "eps") {
      cfg.eps = parse_double_list(value, key);
    } else if (key == "state") {
      cfg.initial_state = parse_double_list(value, key);
    } else if (key.rfind("params.", 0) == 0 && key.size() > 7) {
      cfg.params[key.substr(7)] = parse_double(value, key);
    } else if (key == "integrator.method") {
      cfg.integrator.method = parse_method(value);
    } else if (key == "integrator.dt") {
      cfg.integrator.dt = parse_double(value, key);
      cfg.dt_given = true;
    } else if (key == "integrator.t0") {
      cfg.integrator.t0 = parse_double(value, key);
    } else if (key == "integrator.t1") {
      cfg.integrator.t1 = parse_double(value, key);
    } else if (key == "integrator.sample_dt") {
      cfg.integrator.sample_dt = parse_double(value, key);
    } else if (key == "integrator.abs_tol") {
      cfg.integrator.abs_tol = parse_double(value, key);
    } else if (key == "integrator.rel_tol") {
      cfg.integrator.rel_tol = parse_double(value, key);
    } else if (key == "analysis.t1") {
      cfg.window_t1 = parse_double(value, key);
    } else if (key == "analysis.T") {
      cfg.window_T = parse_double(value, key);
    } else if (key == "analysis.cutoff") {
      cfg.transient_cutoff = parse_double(value, key);
    } else if (key == "analysis.energy_cap") {
      cfg.energy_cap = parse_double(value, key);
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "format") {
      if (value != "csv" && value != "json") throw InvalidConfig("format must be csv or json");
      cfg.format = value;
    } else {
      throw InvalidConfig("unknown config key '" + key + "'");
    }
  }
  for (double e : cfg.eps)
    if (!(e > 0.0)) throw InvalidConfig("eps values must be positive");
  cfg.integrator.validate();
  return cfg;
}

IntegratorConfig ExperimentConfig::integrator_for(std::optional<double> eps) const {
  IntegratorConfig c = integrator;
  if (!dt_given) c.dt = eps ? std::min(1e-3, *eps / 20.0) : 1e-3;
  c.validate();
  return c;
}

}  // namespace nonholib::cli
