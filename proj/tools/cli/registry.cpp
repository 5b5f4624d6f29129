#include "cli/registry.hpp"

#include <algorithm>
#include <cmath>

#include "nonholib/errors.hpp"
#include "nonholib/systems.hpp"

namespace nonholib::cli {

namespace {

double eps_or_throw(std::optional<double> eps, Model m) {
  if (!eps) throw InvalidConfig("model " + to_string(m) + " needs an eps value");
  if (!(*eps > 0.0)) throw NonPositiveEpsilon("eps must be positive");
  return *eps;
}

/// Runs of the four models of a Rayleigh bundle. `frame_out` maps a full
/// frame state to output columns; reduced states are lifted with eta = 0
/// (nh) or eta = eps h1 (corrected).
Run bundle_run(const Bundle& b, Model model, std::optional<double> eps, const Vector& frame_x0,
               std::function<Vector(const Vector&)> frame_out) {
  const Eigen::Index n = b.frame.n, k = b.frame.k;
  Run run;
  switch (model) {
    case Model::NH:
      run.field = nonholonomic_field(b.sys, b.frame);
      run.x0 = frame_x0.head(n + k);
      run.output = [frame_out, n, k](const Vector& x) {
        Vector full = Vector::Zero(2 * n);
        full.head(n + k) = x;
        return frame_out(full);
      };
      break;
    case Model::Corrected: {
      const double e = eps_or_throw(eps, model);
      run.field = corrected_field(b.sys, b.frame, b.friction, e);
      run.x0 = frame_x0.head(n + k);
      auto h1 = compute_h1(b.sys, b.frame, b.friction).h1;
      run.output = [frame_out, h1, e, n, k](const Vector& x) {
        Vector full(2 * n);
        full.head(n + k) = x;
        full.tail(n - k) = e * h1(x.head(n), x.tail(k));
        return frame_out(full);
      };
      break;
    }
    case Model::Friction:
      run.field = friction_field(b.sys, b.frame, b.friction, eps_or_throw(eps, model));
      run.x0 = frame_x0;
      run.output = frame_out;
      break;
    case Model::Fast:
      run.field = fast_field_y0(b.sys, b.frame, b.friction);
      run.x0 = frame_x0;
      run.output = frame_out;
      break;
  }
  return run;
}

SleighParams sleigh_params(const Params& p) {
  SleighParams s{p.at("m"), p.at("I"), p.at("a")};
  s.validate();
  return s;
}

Bundle sleigh_bundle(const Params& p) {
  const SleighParams s = sleigh_params(p);
  return {sleigh_system(s), sleigh_ortho_frame(s), sleigh_friction(s)};
}

/// (x, y, phi, u, v, omega) or (u, omega) -> (x, y, phi, u, psi, v).
Vector sleigh_frame_state(const Params& p, const std::vector<double>& st) {
  const SleighParams s = sleigh_params(p);
  double x = 0, y = 0, phi = 0, u, v = 0, omega;
  if (st.size() == 6) {
    x = st[0], y = st[1], phi = st[2], u = st[3], v = st[4], omega = st[5];
  } else if (st.size() == 2) {
    u = st[0], omega = st[1];
  } else {
    throw InvalidConfig("sleigh state needs 6 values (x,y,phi,u,v,omega) or 2 values (u,omega)");
  }
  Vector out(6);
  out << x, y, phi, u, sleigh_psi(s, v, omega), v;
  return out;
}

Vector pendulum_chart_state(const std::vector<double>& st) {
  if (st.size() != 4 && st.size() != 2)
    throw InvalidConfig("pendulum state needs 4 values (x,y,xdot,ydot) or 2 values (x,y)");
  Vector out = Vector::Zero(4);
  for (std::size_t i = 0; i < st.size(); ++i) out[static_cast<Eigen::Index>(i)] = st[i];
  if (std::hypot(out[0], out[1]) < 1e-8) throw InvalidConfig("pendulum state must stay away from the origin");
  return out;
}

Bundle pendulum_bundle(const Params& p) {
  return {pendulum_gravity_system(p.at("g")), pendulum_polar_frame(), pendulum_radial_friction()};
}

/// Chart (x, y, xdot, ydot) -> polar frame state (x, y, tangential, radial).
Vector pendulum_frame_state(const Params&, const std::vector<double>& st) {
  const Vector c = pendulum_chart_state(st);
  const double r = std::hypot(c[0], c[1]);
  Vector out(4);
  out << c[0], c[1], (-c[1] * c[2] + c[0] * c[3]) / r, (c[0] * c[2] + c[1] * c[3]) / r;
  return out;
}

Vector pendulum_chart_from_frame(const Vector& x) {
  const double r = std::hypot(x[0], x[1]);
  Vector out(4);
  out << x[0], x[1], (-x[1] * x[2] + x[0] * x[3]) / r, (x[0] * x[2] + x[1] * x[3]) / r;
  return out;
}

SystemEntry make_sleigh() {
  SystemEntry e;
  e.name = "sleigh";
  e.summary = "Chaplygin sleigh; blade friction -v/eps realizes the knife edge";
  e.defaults = {{"m", 1.0}, {"I", 1.0}, {"a", 0.2}};
  e.default_state = {0.0, 0.0, 0.0, -1.0, 0.0, 0.5};
  e.state_help = "x,y,phi,u,v,omega or u,omega";
  e.columns = {"x", "y", "phi", "u", "v", "omega"};
  e.frame_names = {"x", "y", "phi", "u", "psi", "v"};
  e.models = {Model::NH, Model::Friction, Model::Corrected, Model::Fast};
  e.compare_components = {3, 4};
  e.bundle = sleigh_bundle;
  e.to_frame_state = sleigh_frame_state;
  e.make_run = [](const Params& p, Model m, std::optional<double> eps, const std::vector<double>& st) {
    const SleighParams s = sleigh_params(p);
    auto out = [s](const Vector& x) {
      Vector o(6);
      o << x[0], x[1], x[2], x[3], x[5], sleigh_omega(s, x[5], x[4]);
      return o;
    };
    return bundle_run(sleigh_bundle(p), m, eps, sleigh_frame_state(p, st), out);
  };
  return e;
}

SystemEntry make_pendulum_friction() {
  SystemEntry e;
  e.name = "pendulum-friction";
  e.summary = "planar pendulum; radial friction rdot/eps realizes the circle";
  e.defaults = {{"g", 9.81}};
  e.default_state = {std::sqrt(0.5), -std::sqrt(0.5), 0.0, 0.0};
  e.state_help = "x,y,xdot,ydot or x,y";
  e.columns = {"x", "y", "xdot", "ydot"};
  e.frame_names = {"x", "y", "vt", "vr"};
  e.models = {Model::NH, Model::Friction, Model::Corrected, Model::Fast};
  e.compare_components = {0, 1, 2};
  e.bundle = pendulum_bundle;
  e.to_frame_state = pendulum_frame_state;
  e.make_run = [](const Params& p, Model m, std::optional<double> eps, const std::vector<double>& st) {
    return bundle_run(pendulum_bundle(p), m, eps, pendulum_frame_state(p, st), pendulum_chart_from_frame);
  };
  return e;
}

SystemEntry make_pendulum_chart(const std::string& name, const std::string& summary, PendulumVariant variant) {
  SystemEntry e;
  e.name = name;
  e.summary = summary;
  e.defaults = {{"g", 9.81}};
  e.default_state = {std::sqrt(0.5), -std::sqrt(0.5), 0.0, 0.0};
  e.state_help = "x,y,xdot,ydot or x,y";
  e.columns = {"x", "y", "xdot", "ydot"};
  e.models = {Model::NH, Model::Friction};
  e.make_run = [variant](const Params& p, Model m, std::optional<double> eps, const std::vector<double>& st) {
    if (m == Model::NH)
      return bundle_run(pendulum_bundle(p), m, eps, pendulum_frame_state(p, st), pendulum_chart_from_frame);
    Run run;
    run.field = make_pendulum(variant, PendulumParams{p.at("g"), eps_or_throw(eps, m)});
    run.x0 = pendulum_chart_state(st);
    run.output = [](const Vector& x) { return x; };
    return run;
  };
  return e;
}

}  // namespace

bool SystemEntry::supports(Model m) const { return std::find(models.begin(), models.end(), m) != models.end(); }

const std::vector<SystemEntry>& registry() {
  static const std::vector<SystemEntry> entries = {
      make_sleigh(),
      make_pendulum_friction(),
      make_pendulum_chart("pendulum-potential", "planar pendulum; stiff spring (r-1)^2/(2 eps) realizes the circle",
                          PendulumVariant::Potential),
      make_pendulum_chart("pendulum-inertial", "planar pendulum; radial inertia 1/eps realizes the circle",
                          PendulumVariant::Inertial),
  };
  return entries;
}

const SystemEntry& find_system(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw InvalidConfig("unknown system '" + name + "' (see list-systems)");
}

Params resolve_params(const SystemEntry& entry, const std::map<std::string, double>& given) {
  Params p = entry.defaults;
  for (const auto& [k, v] : given) {
    auto it = p.find(k);
    if (it == p.end()) throw InvalidConfig("system " + entry.name + " has no parameter '" + k + "'");
    it->second = v;
  }
  return p;
}

}  // namespace nonholib::cli
