#pragma once

// Trajectory comparison and convergence diagnostics for friction limits.

#include <cstddef>
#include <functional>
#include <vector>

#include "nonholib/dynamics.hpp"

namespace nonholib {

struct TimeWindow {
  double t1 = 0.5;
  double T = 10.0;
};

struct ConvergenceReport {
  std::vector<double> eps_ladder;  ///< decreasing
  std::vector<double> errors;      ///< sup distance per eps
  std::vector<double> orders;      ///< per adjacent pair
  std::vector<double> defects;     ///< pseudo-solution defect per eps (may be empty)
  TimeWindow t_window;
};

/// One post-transient sample of a frame trajectory.
struct ManifoldSample {
  double t;
  Vector q;
  Vector xi;
  Vector eta;
  Vector predicted;  ///< eps * h1(q, xi)
};

struct ManifoldFit {
  std::vector<ManifoldSample> samples;
  double residual_sup = 0.0;  ///< max |eta - eps h1(q, xi)|
  /// Least-squares scale s in eta ~ s * h1(q, xi); tends to eps.
  double fitted_scale = 0.0;
};

/// sup over a uniform grid on [t1, T] of the Euclidean distance between the
/// selected components; grid spacing is the smaller sample spacing of the two.
/// Throws WindowMismatch if either trajectory does not cover the window.
double sup_distance(const Trajectory& a, const Trajectory& b, double t1, double T,
                    const std::vector<Eigen::Index>& components);

/// order_i = log(e_i / e_{i+1}) / log(eps_i / eps_{i+1}); log2 for halving
/// ladders. Throws LadderTooShort with fewer than two entries.
std::vector<double> estimate_order(const ConvergenceReport& report);

/// sup_t |xdot(t) - X(x(t))| using the stored derivatives. Only the first
/// `dim` components of the trajectory enter (dim = 0 means all), which
/// realizes the projection (q, xi, eta) -> (q, xi).
double pseudo_solution_defect(const Trajectory& traj, const VectorField& field, Eigen::Index dim = 0);

struct EnergyAudit {
  double max_relative_violation = 0.0;  ///< of dE/dt = -nu(qdot, qdot) / eps
  double max_increase = 0.0;            ///< largest E(t_{i+1}) - E(t_i), <= 0 when dissipative
  bool nonincreasing = true;
};

/// Compares a fourth-order central difference of E along the sample grid with
/// -P / eps. The violation is normalized by max |P / eps| over the audited
/// samples, or by max |E| / duration when no power is dissipated.
EnergyAudit energy_audit(const Trajectory& traj, const std::function<double(const Vector&)>& energy,
                         const std::function<double(const Vector&)>& power, double eps);
/// Frame-state trajectory of friction_field.
EnergyAudit energy_audit(const Trajectory& traj, const MechanicalSystem& sys, const MovingFrame& fr,
                         const RayleighFriction& fric, double eps);
/// Chart-state trajectory of friction_field_chart.
EnergyAudit energy_audit(const Trajectory& traj, const MechanicalSystem& sys, const RayleighFriction& fric,
                         double eps);

/// Collects samples with t >= transient_cutoff from a frame-state trajectory
/// and compares eta against eps h1. Throws TransientTooShort when the
/// trajectory ends before the cutoff.
ManifoldFit manifold_fit(const Trajectory& traj, const ExpansionData& expansion, double eps,
                         double transient_cutoff, Eigen::Index n, Eigen::Index k);

}  // namespace nonholib
