#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "cli/registry.hpp"
#include "nonholib/analysis.hpp"
#include "nonholib/errors.hpp"

namespace nonholib::cli {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool needs_eps(Model m) { return m == Model::Friction || m == Model::Corrected; }

std::vector<double> state_or_default(const ExperimentConfig& cfg, const SystemEntry& entry) {
  return cfg.initial_state.empty() ? entry.default_state : cfg.initial_state;
}

Table tabulate(const Trajectory& traj, const Run& run, const SystemEntry& entry) {
  Table t;
  t.header.push_back("t");
  t.header.insert(t.header.end(), entry.columns.begin(), entry.columns.end());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector o = run.output(traj.states()[i]);
    std::vector<double> row{traj.times()[i]};
    row.insert(row.end(), o.data(), o.data() + o.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<double> decreasing_ladder(std::vector<double> eps) {
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (std::adjacent_find(eps.begin(), eps.end()) != eps.end())
    throw InvalidConfig("eps ladder contains repeated values");
  return eps;
}

Trajectory restrict_to(const Trajectory& traj, double t1, double T) {
  std::vector<double> times;
  std::vector<Vector> states, derivs;
  const double slack = 1e-9 * std::max(1.0, std::abs(T));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    if (t < t1 - slack || t > T + slack) continue;
    times.push_back(t);
    states.push_back(traj.states()[i]);
    derivs.push_back(traj.derivatives()[i]);
  }
  if (times.empty()) throw WindowMismatch("no samples inside the comparison window");
  return Trajectory(std::move(times), std::move(states), std::move(derivs));
}

const SystemEntry& bundle_entry(const ExperimentConfig& cfg, const char* what) {
  const SystemEntry& entry = find_system(cfg.system);
  if (!entry.bundle)
    throw InvalidConfig(std::string(what) + " needs a system whose constraint is realized by Rayleigh friction; " +
                        entry.name + " is not");
  return entry;
}

/// Initial energy of the frame start and the warnings it triggers against the cap.
std::pair<double, nlohmann::json> energy_check(const ExperimentConfig& cfg, const SystemEntry& entry,
                                               const Bundle& bundle, const Params& params,
                                               const std::vector<double>& state) {
  const double e0 = energy_frame(bundle.sys, bundle.frame, entry.to_frame_state(params, state));
  nlohmann::json warnings = nlohmann::json::array();
  if (cfg.energy_cap && e0 > *cfg.energy_cap) {
    std::ostringstream msg;
    msg << "initial energy " << format_double(e0) << " exceeds the energy cap " << format_double(*cfg.energy_cap)
        << "; convergence rates are only guaranteed below it";
    warnings.push_back(msg.str());
  }
  return {e0, warnings};
}

nlohmann::json echo_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : cfg.echo) j[k] = v;
  return j;
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string s;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) s += ',';
    s += table.header[i];
  }
  s += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += format_double(row[i]);
    }
    s += '\n';
  }
  return s;
}

std::vector<SimulationRun> run_simulate(const ExperimentConfig& cfg) {
  const SystemEntry& entry = find_system(cfg.system);
  const Model model = cfg.model.value_or(Model::NH);
  if (!entry.supports(model))
    throw InvalidConfig("system " + entry.name + " has no " + to_string(model) + " model");
  const Params params = resolve_params(entry, cfg.params);
  const auto state = state_or_default(cfg, entry);

  std::vector<std::optional<double>> eps_list;
  if (needs_eps(model)) {
    if (cfg.eps.empty()) throw InvalidConfig("model " + to_string(model) + " needs eps");
    eps_list.assign(cfg.eps.begin(), cfg.eps.end());
  } else {
    eps_list.push_back(std::nullopt);
  }

  std::vector<std::future<SimulationRun>> tasks;
  for (auto eps : eps_list) {
    const Run run = entry.make_run(params, model, eps, state);
    const IntegratorConfig icfg = cfg.integrator_for(eps);
    tasks.push_back(std::async(std::launch::async, [run, icfg, eps, &entry] {
      Trajectory traj = integrate(run.field, run.x0, icfg);
      Table table = tabulate(traj, run, entry);
      return SimulationRun{eps, std::move(traj), std::move(table)};
    }));
  }
  std::vector<SimulationRun> out;
  for (auto& t : tasks) out.push_back(t.get());
  return out;
}

nlohmann::json run_compare(const ExperimentConfig& cfg) {
  const SystemEntry& entry = bundle_entry(cfg, "compare");
  const Params params = resolve_params(entry, cfg.params);
  const auto state = state_or_default(cfg, entry);
  if (cfg.eps.size() < 2) throw LadderTooShort("compare needs an eps ladder with at least two entries");
  const std::vector<double> ladder = decreasing_ladder(cfg.eps);
  const double t1 = cfg.window_t1, T = cfg.window_end();
  if (!(T > t1)) throw WindowMismatch("comparison window needs T > t1");
  if (T > cfg.integrator.t1 + 1e-12 || t1 < cfg.integrator.t0 - 1e-12)
    throw WindowMismatch("comparison window exceeds the integration interval");

  const Bundle bundle = entry.bundle(params);
  const Eigen::Index reduced = bundle.frame.n + bundle.frame.k;
  const auto comps = entry.compare_components;

  const Run nh = entry.make_run(params, Model::NH, std::nullopt, state);
  const IntegratorConfig nh_cfg = cfg.integrator_for(std::nullopt);
  auto nh_task = std::async(std::launch::async, [nh, nh_cfg] { return integrate(nh.field, nh.x0, nh_cfg); });

  struct Entry {
    Trajectory friction;
    Trajectory corrected;
    double corrected_defect;
  };
  std::vector<std::future<Entry>> tasks;
  for (double eps : ladder) {
    const Run fr = entry.make_run(params, Model::Friction, eps, state);
    const Run co = entry.make_run(params, Model::Corrected, eps, state);
    const IntegratorConfig fcfg = cfg.integrator_for(eps);
    const IntegratorConfig ccfg = cfg.integrator_for(std::nullopt);
    tasks.push_back(std::async(std::launch::async, [fr, co, fcfg, ccfg, t1, T, reduced] {
      Trajectory f = integrate(fr.field, fr.x0, fcfg);
      Trajectory c = integrate(co.field, co.x0, ccfg);
      const double defect = pseudo_solution_defect(restrict_to(f, t1, T), co.field, reduced);
      return Entry{std::move(f), std::move(c), defect};
    }));
  }
  const Trajectory nh_traj = nh_task.get();

  ConvergenceReport to_nh{ladder, {}, {}, {}, {t1, T}};
  ConvergenceReport to_corrected = to_nh;
  for (auto& task : tasks) {
    const Entry e = task.get();
    to_nh.errors.push_back(sup_distance(e.friction, nh_traj, t1, T, comps));
    to_nh.defects.push_back(pseudo_solution_defect(restrict_to(e.friction, t1, T), nh.field, reduced));
    to_corrected.errors.push_back(sup_distance(e.friction, e.corrected, t1, T, comps));
    to_corrected.defects.push_back(e.corrected_defect);
  }
  to_nh.orders = estimate_order(to_nh);
  to_corrected.orders = estimate_order(to_corrected);

  std::vector<std::string> names;
  for (auto c : comps) names.push_back(entry.frame_names[static_cast<std::size_t>(c)]);

  nlohmann::json j;
  j["system"] = entry.name;
  j["model"] = "friction";
  j["eps_ladder"] = ladder;
  j["errors"] = to_nh.errors;
  j["orders"] = to_nh.orders;
  j["defects"] = to_nh.defects;
  j["corrected_errors"] = to_corrected.errors;
  j["corrected_orders"] = to_corrected.orders;
  j["corrected_defects"] = to_corrected.defects;
  j["components"] = names;
  j["t_window"] = {{"t1", t1}, {"T", T}};
  const auto [e0, warnings] = energy_check(cfg, entry, bundle, params, state);
  j["initial_energy"] = e0;
  j["warnings"] = warnings;
  j["config_echo"] = echo_json(cfg);
  return j;
}

ManifoldResult run_manifold(const ExperimentConfig& cfg) {
  const SystemEntry& entry = bundle_entry(cfg, "manifold");
  if (cfg.model && *cfg.model != Model::Friction)
    throw InvalidConfig("manifold extraction needs eta data, so the model must be friction");
  if (cfg.eps.empty()) throw InvalidConfig("manifold needs at least one eps value");
  const Params params = resolve_params(entry, cfg.params);
  const auto state = state_or_default(cfg, entry);
  const std::vector<double> ladder = decreasing_ladder(cfg.eps);
  const double cutoff = cfg.transient_cutoff;
  if (cfg.integrator.t1 <= cutoff) {
    std::ostringstream msg;
    msg << "integration ends at " << cfg.integrator.t1 << " before the transient cutoff " << cutoff;
    throw TransientTooShort(msg.str());
  }

  const Bundle bundle = entry.bundle(params);
  const Eigen::Index n = bundle.frame.n, k = bundle.frame.k;
  const ExpansionData expansion = compute_h1(bundle.sys, bundle.frame, bundle.friction);

  std::vector<std::future<ManifoldFit>> tasks;
  for (double eps : ladder) {
    const Run run = entry.make_run(params, Model::Friction, eps, state);
    const IntegratorConfig icfg = cfg.integrator_for(eps);
    tasks.push_back(std::async(std::launch::async, [run, icfg, expansion, eps, cutoff, n, k] {
      return manifold_fit(integrate(run.field, run.x0, icfg), expansion, eps, cutoff, n, k);
    }));
  }

  ManifoldResult result;
  std::vector<double> residuals, scales, ratios;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const ManifoldFit fit = tasks[i].get();
    residuals.push_back(fit.residual_sup);
    scales.push_back(fit.fitted_scale);
    counts.push_back(fit.samples.size());

    Table t;
    t.header.push_back("t");
    for (Eigen::Index c = n; c < 2 * n; ++c) t.header.push_back(entry.frame_names[static_cast<std::size_t>(c)]);
    for (Eigen::Index c = n + k; c < 2 * n; ++c)
      t.header.push_back("eps_h1_" + entry.frame_names[static_cast<std::size_t>(c)]);
    for (const auto& s : fit.samples) {
      std::vector<double> row{s.t};
      row.insert(row.end(), s.xi.data(), s.xi.data() + s.xi.size());
      row.insert(row.end(), s.eta.data(), s.eta.data() + s.eta.size());
      row.insert(row.end(), s.predicted.data(), s.predicted.data() + s.predicted.size());
      t.rows.push_back(std::move(row));
    }
    result.scatter.push_back(std::move(t));
  }
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i) ratios.push_back(residuals[i] / residuals[i + 1]);

  nlohmann::json& j = result.report;
  j["system"] = entry.name;
  j["model"] = "friction";
  j["eps_ladder"] = ladder;
  j["residual_sup"] = residuals;
  j["residual_ratios"] = ratios;
  j["fitted_scale"] = scales;
  j["sample_counts"] = counts;
  j["transient_cutoff"] = cutoff;
  const auto [e0, warnings] = energy_check(cfg, entry, bundle, params, state);
  j["initial_energy"] = e0;
  j["warnings"] = warnings;
  j["config_echo"] = echo_json(cfg);
  return result;
}

nlohmann::json list_systems() {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : registry()) {
    std::vector<std::string> models;
    for (auto m : e.models) models.push_back(to_string(m));
    arr.push_back({{"name", e.name},
                   {"summary", e.summary},
                   {"params", e.defaults},
                   {"models", models},
                   {"state", e.state_help},
                   {"default_state", e.default_state},
                   {"columns", e.columns}});
  }
  return arr;
}

namespace {

struct Options {
  std::string config, system, model, state, t0, t1, dt, sample_dt, out, format;
  std::vector<std::string> eps, params;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key=value config file");
  sub->add_option("--system", o.system, "registry name (see list-systems)");
  sub->add_option("--model", o.model, "nh | friction | corrected | fast");
  sub->add_option("--eps", o.eps, "friction scale; repeat or comma-separate for a ladder")->delimiter(',');
  sub->add_option("--state", o.state, "initial state as a comma-separated list");
  sub->add_option("--t0", o.t0, "start time");
  sub->add_option("--t1", o.t1, "end time");
  sub->add_option("--dt", o.dt, "integrator step");
  sub->add_option("--sample-dt", o.sample_dt, "output sample spacing");
  sub->add_option("--param", o.params, "system parameter NAME=VALUE (repeatable)");
  sub->add_option("--out", o.out, "output path");
  sub->add_option("--format", o.format, "csv | json");
}

ExperimentConfig merge(const Options& o) {
  KeyValues kv;
  if (!o.config.empty()) kv = read_config_file(o.config);
  auto set = [&](const std::string& key, const std::string& v) {
    if (!v.empty()) kv[key] = v;
  };
  set("system", o.system);
  set("model", o.model);
  set("state", o.state);
  set("integrator.t0", o.t0);
  set("integrator.t1", o.t1);
  set("integrator.dt", o.dt);
  set("integrator.sample_dt", o.sample_dt);
  set("out", o.out);
  set("format", o.format);
  if (!o.eps.empty()) {
    std::string joined;
    for (const auto& e : o.eps) joined += (joined.empty() ? "" : ",") + e;
    kv["eps"] = joined;
  }
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidConfig("--param expects NAME=VALUE, got '" + p + "'");
    kv["params." + p.substr(0, eq)] = p.substr(eq + 1);
  }
  return build_config(kv);
}

/// Resolves the output path: --out / out key as given, else NONHOLIB_OUT_DIR/default_name,
/// else empty (stdout).
std::string output_path(const ExperimentConfig& cfg, const std::string& default_name) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* dir = std::getenv("NONHOLIB_OUT_DIR"); dir && *dir)
    return (std::filesystem::path(dir) / default_name).string();
  return {};
}

std::string with_suffix(const std::string& path, const std::string& suffix, const std::string& ext) {
  std::filesystem::path p(path);
  const std::string stem = p.stem().string();
  return (p.parent_path() / (stem + suffix + ext)).string();
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidConfig("cannot write " + path);
  f << content;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty())
    out << content;
  else
    write_file(path, content);
}

std::string simulation_json(const ExperimentConfig& cfg, const SimulationRun& run, Model model) {
  nlohmann::json j;
  j["system"] = cfg.system;
  j["model"] = to_string(model);
  j["eps"] = run.eps ? nlohmann::json(*run.eps) : nlohmann::json(nullptr);
  j["columns"] = run.table.header;
  j["rows"] = run.table.rows;
  j["config_echo"] = echo_json(cfg);
  return j.dump(2) + "\n";
}

int do_simulate(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = cfg.model.value_or(Model::NH);
  const std::string fmt = cfg.format.empty() ? "csv" : cfg.format;
  const auto runs = run_simulate(cfg);
  const std::string ext = "." + fmt;
  const std::string base = output_path(cfg, cfg.system + "_" + to_string(model) + ext);
  if (runs.size() > 1 && base.empty())
    throw InvalidConfig("an eps ladder writes one file per eps; set --out or NONHOLIB_OUT_DIR");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string path = runs.size() == 1 ? base : with_suffix(base, "_eps" + std::to_string(i), ext);
    emit(path, fmt == "csv" ? to_csv(runs[i].table) : simulation_json(cfg, runs[i], model), out);
  }
  return 0;
}

int do_compare(const ExperimentConfig& cfg, std::ostream& out) {
  const nlohmann::json report = run_compare(cfg);
  const std::string fmt = cfg.format.empty() ? "json" : cfg.format;
  std::string content;
  if (fmt == "json") {
    content = report.dump(2) + "\n";
  } else {
    Table t{{"eps", "error", "order", "defect", "corrected_error", "corrected_order", "corrected_defect"}, {}};
    const auto& ladder = report["eps_ladder"];
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const bool has_order = i + 1 < ladder.size();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      t.rows.push_back({ladder[i].get<double>(), report["errors"][i].get<double>(),
                        has_order ? report["orders"][i].get<double>() : nan, report["defects"][i].get<double>(),
                        report["corrected_errors"][i].get<double>(),
                        has_order ? report["corrected_orders"][i].get<double>() : nan,
                        report["corrected_defects"][i].get<double>()});
    }
    content = to_csv(t);
  }
  emit(output_path(cfg, cfg.system + "_compare." + fmt), content, out);
  return 0;
}

int do_manifold(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  ManifoldResult res = run_manifold(cfg);
  const std::string path = output_path(cfg, cfg.system + "_manifold.json");
  if (path.empty()) {
    err << "note: scatter CSV files are only written with --out or NONHOLIB_OUT_DIR\n";
  } else {
    std::vector<std::string> files;
    for (std::size_t i = 0; i < res.scatter.size(); ++i) {
      const std::string csv = with_suffix(path, "_scatter_eps" + std::to_string(i), ".csv");
      write_file(csv, to_csv(res.scatter[i]));
      files.push_back(std::filesystem::path(csv).filename().string());
    }
    res.report["scatter_files"] = files;
  }
  emit(path, res.report.dump(2) + "\n", out);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nonholib: nonholonomic constraints as friction limits"};
  app.require_subcommand(1);
  Options opts;
  auto* simulate = app.add_subcommand("simulate", "integrate one model and write its trajectory");
  auto* compare = app.add_subcommand("compare", "convergence of a friction ladder to nh and corrected fields");
  auto* manifold = app.add_subcommand("manifold", "slow-manifold slaving of eta against eps h1");
  auto* list = app.add_subcommand("list-systems", "print the system registry as JSON");
  for (auto* sub : {simulate, compare, manifold}) add_common(sub, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      out << list_systems().dump(2) << "\n";
      return 0;
    }
    const ExperimentConfig cfg = merge(opts);
    if (simulate->parsed()) return do_simulate(cfg, out);
    if (compare->parsed()) return do_compare(cfg, out);
    if (manifold->parsed()) return do_manifold(cfg, out, err);
  } catch (const NonFiniteState& e) {
    err << "error: non-finite state at t=" << e.time() << "\n";
    return 3;
  } catch (const StepUnderflow& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const TransientTooShort& e) {
    err << "error: TransientTooShort: " << e.what() << "\n";
    return 4;
  } catch (const WindowMismatch& e) {
    err << "error: WindowMismatch: " << e.what() << "\n";
    return 4;
  } catch (const LadderTooShort& e) {
    err << "error: LadderTooShort: " << e.what() << "\n";
    return 2;
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonPositiveEpsilon& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace nonholib::cli
