#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "nonholib/dynamics.hpp"

namespace nonholib::cli {

using Params = std::map<std::string, double>;

/// Mechanical system, adapted frame and Rayleigh friction realizing D.
struct Bundle {
  MechanicalSystem sys;
  MovingFrame frame;
  RayleighFriction friction;
};

/// A ready-to-integrate model: field, start in the field's layout, and the
/// map from that layout to the output columns.
struct Run {
  VectorField field;
  Vector x0;
  std::function<Vector(const Vector&)> output;
};

struct SystemEntry {
  std::string name;
  std::string summary;
  Params defaults;
  std::vector<double> default_state;
  std::string state_help;
  std::vector<std::string> columns;      ///< output columns after t
  std::vector<std::string> frame_names;  ///< frame-state layout (q, xi, eta); empty without a bundle
  std::vector<Model> models;
  std::vector<Eigen::Index> compare_components;  ///< indices into the shared (q, xi) prefix
  std::function<Bundle(const Params&)> bundle;   ///< empty when D is not realized by Rayleigh friction
  /// Maps a user state to the frame state (q, xi, eta) of the bundle.
  std::function<Vector(const Params&, const std::vector<double>&)> to_frame_state;
  std::function<Run(const Params&, Model, std::optional<double>, const std::vector<double>&)> make_run;

  bool supports(Model m) const;
};

const std::vector<SystemEntry>& registry();

/// Throws InvalidConfig for unknown names.
const SystemEntry& find_system(const std::string& name);

/// Entry defaults overlaid with `given`; unknown parameter names throw InvalidConfig.
Params resolve_params(const SystemEntry& entry, const std::map<std::string, double>& given);

}  // namespace nonholib::cli
