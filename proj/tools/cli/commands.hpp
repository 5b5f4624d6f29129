#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "nonholib/ode.hpp"

namespace nonholib::cli {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Header line, then one row per line; 17 significant digits, comma separated, LF endings.
std::string to_csv(const Table& table);

struct SimulationRun {
  std::optional<double> eps;
  Trajectory trajectory;  ///< in the model's internal layout
  Table table;            ///< t followed by the system's output columns
};

/// One run per eps for eps-dependent models, a single run otherwise.
std::vector<SimulationRun> run_simulate(const ExperimentConfig& cfg);

/// Convergence report of the friction ladder against the nonholonomic and
/// the corrected fields.
nlohmann::json run_compare(const ExperimentConfig& cfg);

struct ManifoldResult {
  nlohmann::json report;
  std::vector<Table> scatter;  ///< per eps, in ladder order
};
ManifoldResult run_manifold(const ExperimentConfig& cfg);

nlohmann::json list_systems();

/// Full command-line entry point: parses arguments, runs the subcommand,
/// writes outputs, and maps failures to exit codes 2 (config), 3 (numerical
/// blow-up) and 4 (analysis precondition).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nonholib::cli
