#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nonholib/ode.hpp"

namespace nonholib::cli {

enum class Model { NH, Friction, Corrected, Fast };

std::string to_string(Model m);
Model parse_model(const std::string& s);

using KeyValues = std::map<std::string, std::string>;

struct ExperimentConfig {
  std::string system = "sleigh";
  std::optional<Model> model;
  std::map<std::string, double> params;
  std::vector<double> eps;
  std::vector<double> initial_state;
  IntegratorConfig integrator;
  bool dt_given = false;
  double window_t1 = 0.5;
  std::optional<double> window_T;  ///< defaults to integrator.t1
  double transient_cutoff = 0.5;
  std::optional<double> energy_cap;  ///< starts above it are run but flagged in reports
  std::string out;
  std::string format;
  KeyValues echo;  ///< every key as given, after overrides

  double window_end() const { return window_T.value_or(integrator.t1); }
  /// dt if given, else min(1e-3, eps / 20) for stiff models and 1e-3 otherwise.
  IntegratorConfig integrator_for(std::optional<double> eps) const;
};

/// Reads key=value lines; '#' starts a comment, blank lines are skipped.
/// Throws InvalidConfig on malformed lines or repeated keys.
KeyValues parse_key_values(std::istream& in, const std::string& origin = "<config>");
KeyValues read_config_file(const std::string& path);

/// Builds a config from merged keys. Unknown keys and unparsable values throw InvalidConfig.
ExperimentConfig build_config(const KeyValues& kv);

double parse_double(const std::string& s, const std::string& key);
std::vector<double> parse_double_list(const std::string& s, const std::string& key);

}  // namespace nonholib::cli
