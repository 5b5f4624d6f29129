#include "nonholib/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nonholib/errors.hpp"

namespace nonholib {

namespace {

bool covers(const Trajectory& traj, double t1, double T) {
  const double slack = 1e-9 * std::max(1.0, std::abs(T));
  return traj.t_begin() <= t1 + slack && traj.t_end() >= T - slack;
}

double clamp_to(const Trajectory& traj, double t) { return std::clamp(t, traj.t_begin(), traj.t_end()); }

}  // namespace

double sup_distance(const Trajectory& a, const Trajectory& b, double t1, double T,
                    const std::vector<Eigen::Index>& components) {
  if (!(T > t1)) throw WindowMismatch("comparison window needs T > t1");
  if (!covers(a, t1, T) || !covers(b, t1, T)) {
    std::ostringstream msg;
    msg << "trajectories do not cover the window [" << t1 << ", " << T << "]";
    throw WindowMismatch(msg.str());
  }
  for (auto c : components)
    if (c < 0 || c >= a.dimension() || c >= b.dimension())
      throw WindowMismatch("component index outside the trajectory dimension");

  const double h = std::min(a.min_spacing(), b.min_spacing());
  const auto intervals = static_cast<std::size_t>(
      std::isfinite(h) ? std::max(1.0, std::ceil((T - t1) / h - 1e-9)) : 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double t = t1 + (T - t1) * static_cast<double>(i) / static_cast<double>(intervals);
    const Vector xa = a.sample_at(clamp_to(a, t));
    const Vector xb = b.sample_at(clamp_to(b, t));
    double d2 = 0.0;
    for (auto c : components) d2 += (xa[c] - xb[c]) * (xa[c] - xb[c]);
    worst = std::max(worst, std::sqrt(d2));
  }
  return worst;
}

std::vector<double> estimate_order(const ConvergenceReport& report) {
  const auto& eps = report.eps_ladder;
  const auto& err = report.errors;
  if (eps.size() < 2 || err.size() != eps.size())
    throw LadderTooShort("order estimation needs at least two ladder entries with errors");
  std::vector<double> orders;
  orders.reserve(eps.size() - 1);
  for (std::size_t i = 0; i + 1 < eps.size(); ++i)
    orders.push_back(std::log(err[i] / err[i + 1]) / std::log(eps[i] / eps[i + 1]));
  return orders;
}

double pseudo_solution_defect(const Trajectory& traj, const VectorField& field, Eigen::Index dim) {
  const Eigen::Index m = dim == 0 ? traj.dimension() : dim;
  if (m > traj.dimension()) throw DimensionMismatch("projection larger than trajectory dimension");
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector x = traj.states()[i].head(m);
    const Vector diff = traj.derivatives()[i].head(m) - field(x);
    worst = std::max(worst, diff.norm());
  }
  return worst;
}

EnergyAudit energy_audit(const Trajectory& traj, const std::function<double(const Vector&)>& energy,
                         const std::function<double(const Vector&)>& power, double eps) {
  if (!(eps > 0.0)) throw NonPositiveEpsilon("energy audit needs eps > 0");
  const std::size_t n = traj.size();
  if (n < 5) throw InvalidConfig("energy audit needs at least five samples");
  const auto& t = traj.times();
  const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-6 * h)
      throw InvalidConfig("energy audit needs a uniform sample grid");

  std::vector<double> e(n), rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = energy(traj.states()[i]);
    rate[i] = -power(traj.states()[i]) / eps;
  }

  EnergyAudit audit;
  double e_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) e_scale = std::max(e_scale, std::abs(e[i]));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double inc = e[i + 1] - e[i];
    audit.max_increase = i == 0 ? inc : std::max(audit.max_increase, inc);
    if (inc > 1e-12 * std::max(1.0, e_scale)) audit.nonincreasing = false;
  }

  double worst = 0.0, p_scale = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double fd = (-e[i + 2] + 8.0 * e[i + 1] - 8.0 * e[i - 1] + e[i - 2]) / (12.0 * h);
    worst = std::max(worst, std::abs(fd - rate[i]));
    p_scale = std::max(p_scale, std::abs(rate[i]));
  }
  const double scale = p_scale > 0.0 ? p_scale : std::max(e_scale, 1e-300) / (t.back() - t.front());
  audit.max_relative_violation = worst / scale;
  return audit;
}

EnergyAudit energy_audit(const Trajectory& traj, const MechanicalSystem& sys, const MovingFrame& fr,
                         const RayleighFriction& fric, double eps) {
  return energy_audit(
      traj, [&](const Vector& x) { return energy_frame(sys, fr, x); },
      [&](const Vector& x) { return rayleigh_power_frame(fr, fric, x); }, eps);
}

EnergyAudit energy_audit(const Trajectory& traj, const MechanicalSystem& sys, const RayleighFriction& fric,
                         double eps) {
  const Eigen::Index n = sys.n;
  return energy_audit(
      traj, [&](const Vector& x) { return energy_chart(sys, x.head(n), x.tail(n)); },
      [&](const Vector& x) { return rayleigh_power(fric, x.head(n), x.tail(n)); }, eps);
}

ManifoldFit manifold_fit(const Trajectory& traj, const ExpansionData& expansion, double eps,
                         double transient_cutoff, Eigen::Index n, Eigen::Index k) {
  if (traj.dimension() != 2 * n) throw DimensionMismatch("manifold fit needs a frame-state trajectory");
  if (traj.t_end() <= transient_cutoff) {
    std::ostringstream msg;
    msg << "trajectory ends at " << traj.t_end() << " before the transient cutoff " << transient_cutoff;
    throw TransientTooShort(msg.str());
  }
  ManifoldFit fit;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    if (t < transient_cutoff) continue;
    const Vector& x = traj.states()[i];
    ManifoldSample s{t, x.head(n), x.segment(n, k), x.tail(n - k), Vector()};
    const Vector h1 = expansion.h1(s.q, s.xi);
    s.predicted = eps * h1;
    fit.residual_sup = std::max(fit.residual_sup, (s.eta - s.predicted).norm());
    num += s.eta.dot(h1);
    den += h1.dot(h1);
    fit.samples.push_back(std::move(s));
  }
  fit.fitted_scale = den > 0.0 ? num / den : 0.0;
  return fit;
}

}  // namespace nonholib
