#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace nonholib {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Autonomous vector field x -> dx/dt.
using VectorField = std::function<Vector(const Vector&)>;

enum class Method { RK4, RKF45 };

struct IntegratorConfig {
  Method method = Method::RK4;
  double dt = 1e-3;  ///< step size for RK4, initial step for RKF45
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double t0 = 0.0;
  double t1 = 10.0;
  double sample_dt = 1e-2;

  /// Throws InvalidConfig unless dt, tolerances, sample_dt > 0 and t1 > t0.
  void validate() const;

  /// Number of output samples: floor((t1 - t0) / sample_dt) + 1.
  std::size_t sample_count() const;
};

/// Time-stamped states with the field evaluated at each sample, enough for
/// cubic Hermite dense output. Immutable once built.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<Vector> states,
             std::vector<Vector> derivatives);

  std::size_t size() const noexcept { return times_.size(); }
  Eigen::Index dimension() const noexcept { return states_.front().size(); }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Vector>& states() const noexcept { return states_; }
  const std::vector<Vector>& derivatives() const noexcept { return derivatives_; }

  double t_begin() const noexcept { return times_.front(); }
  double t_end() const noexcept { return times_.back(); }

  /// Smallest spacing between consecutive samples (infinity for one sample).
  double min_spacing() const noexcept;

  /// Cubic Hermite interpolation; exact at the stored nodes.
  /// Throws OutOfRange outside [t_begin, t_end].
  Vector sample_at(double t) const;

 private:
  std::vector<double> times_;
  std::vector<Vector> states_;
  std::vector<Vector> derivatives_;
};

/// Integrates `field` from x0 over [cfg.t0, cfg.t1], storing samples at
/// t0 + i * sample_dt. Steps are subdivided so each sample time is hit
/// exactly. Throws NonFiniteState on NaN/Inf and StepUnderflow when the
/// adaptive step drops below 1e-14 * (t1 - t0).
Trajectory integrate(const VectorField& field, const Vector& x0, const IntegratorConfig& cfg);

/// One classical fourth-order Runge-Kutta step.
Vector rk4_step(const VectorField& field, const Vector& x, double h);

}  // namespace nonholib
