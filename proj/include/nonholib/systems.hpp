#pragma once

// Reference systems: the Chaplygin sleigh with closed-form right-hand sides
// and the planar pendulum with three realizations of the circle constraint.

#include <array>

#include "nonholib/dynamics.hpp"

namespace nonholib {

struct SleighParams {
  double m = 1.0;  ///< mass (kg)
  double I = 1.0;  ///< moment of inertia about the center of mass (kg m^2)
  double a = 0.2;  ///< center-of-mass offset along the blade (m)

  void validate() const;
  double J() const noexcept { return I + m * a * a; }  ///< inertia about the contact point
  double ortho_shift() const noexcept { return m * a / J(); }
  double sideways_mass() const noexcept { return I * m / J(); }  ///< kappa(f_v, f_v) in the orthogonal frame
};

struct PendulumParams {
  double g = 9.81;
  double eps = 0.01;

  void validate() const;
};

enum class PendulumVariant { Potential, Friction, Inertial };

// --- Chaplygin sleigh, closed forms ---------------------------------------

/// (udot, omegadot) of the ideal knife-edge sleigh.
std::array<double, 2> sleigh_nh_rhs(const SleighParams& p, double u, double omega);

/// Constraint reaction magnitude m (u omega + a omegadot); it acts along (-sin phi, cos phi).
double sleigh_constraint_force(const SleighParams& p, double u, double omega, double omegadot);

/// (udot, vdot, omegadot) of the sliding sleigh with friction -v/eps at the blade,
/// from the linear 3x3 system in (u, v, omega) velocities.
std::array<double, 3> sleigh_friction_rhs(const SleighParams& p, double eps, double u, double v, double omega);

/// (udot, vdot, psidot) in the kappa-orthogonal velocities (u, v, psi),
/// psi = omega + m a v / (I + m a^2).
std::array<double, 3> sleigh_friction_ortho_rhs(const SleighParams& p, double eps, double u, double v,
                                                double psi);

double sleigh_psi(const SleighParams& p, double v, double omega);
double sleigh_omega(const SleighParams& p, double v, double psi);

/// Sideways relaxation rate rho = (I + m a^2) / (I m eps).
double sleigh_fast_rate(const SleighParams& p, double eps);

/// v(t) for frozen (u, omega): (v0 + u omega / rho) e^{-rho t} - u omega / rho.
double sleigh_fast_closed_form(const SleighParams& p, double eps, double u, double omega, double v0, double t);

/// First-order sideways drift h1(u, psi) = -I m / (I + m a^2) u psi.
double sleigh_h1_rhs(const SleighParams& p, double u, double psi);

/// First-order correction (xdot, ydot, phidot, udot, psidot) on D.
std::array<double, 5> sleigh_x1_rhs(const SleighParams& p, double x, double y, double phi, double u,
                                    double psi);

// --- Chaplygin sleigh, generic building blocks ----------------------------

/// Chart (x, y, phi) of the contact point and blade angle; V = 0.
MechanicalSystem sleigh_system(const SleighParams& p);
/// Frame (f_u, f_omega | f_v) of the velocities (u, omega, v). Not kappa-orthogonal.
MovingFrame sleigh_frame_uvw(const SleighParams& p);
/// kappa-orthogonal frame (f_u, f_psi | f_v - (m a / J) f_omega) for (u, psi, v).
MovingFrame sleigh_ortho_frame(const SleighParams& p);
/// nu = zeta zeta^T with zeta = (-sin phi, cos phi, 0), i.e. R = 1/2 v^2.
RayleighFriction sleigh_friction(const SleighParams& p);

/// Hand-coded fields in the orthogonal-frame layouts used by the generic code:
/// reduced (x, y, phi, u, psi) and frame (x, y, phi, u, psi, v).
VectorField sleigh_nh_reference(const SleighParams& p);
VectorField sleigh_friction_reference(const SleighParams& p, double eps);
VectorField sleigh_corrected_reference(const SleighParams& p, double eps);

// --- Pendulum -------------------------------------------------------------

/// Euclidean plane with V = g y.
MechanicalSystem pendulum_gravity_system(double g);
/// Euclidean plane with V = g y + (r - 1)^2 / (2 eps).
MechanicalSystem pendulum_potential_system(const PendulumParams& p);
/// kappa = Id + r_hat r_hat^T / eps, V = g y.
MechanicalSystem pendulum_inertial_system(const PendulumParams& p);
/// nu = r_hat r_hat^T, i.e. R = rdot^2 / 2; kernel = tangents of circles.
RayleighFriction pendulum_radial_friction();
/// Orthonormal polar frame (t_hat | r_hat), t_hat = (-y, x) / r.
MovingFrame pendulum_polar_frame();

/// Chart field on (x, y, xdot, ydot) for the chosen realization. Evaluating it
/// within 1e-8 of the origin throws OriginSingularity.
VectorField make_pendulum(PendulumVariant variant, const PendulumParams& p);

/// Minimum of g y + (r - 1)^2 / (2 eps) over the plane.
double pendulum_potential_minimum(const PendulumParams& p);

}  // namespace nonholib
