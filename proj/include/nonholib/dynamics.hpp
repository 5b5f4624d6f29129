#pragma once

// Vector fields of a mechanical system with a linear constraint distribution
// D realized either as an ideal nonholonomic constraint or through Rayleigh
// friction with kernel D.
//
// State layouts (flat vectors, as consumed by integrate()):
//   frame state    (q[n], xi[k], eta[n-k])   friction_field, fast_field_y0
//   reduced state  (q[n], xi[k])             nonholonomic_field, first_order_field, corrected_field
//   chart state    (q[n], qdot[n])           friction_field_chart
//
// All fields are in slow time t.

#include <functional>

#include "nonholib/geometry.hpp"

namespace nonholib {

/// Rayleigh dissipation R = 1/2 nu_q(qdot, qdot) with kernel equal to the
/// span of the frame's first kernel_rank vectors.
struct RayleighFriction {
  Eigen::Index kernel_rank = 0;
  MatrixField nu;  ///< chart components nu_{ij}(q); empty means no friction

  Matrix nu_at(const Vector& q, Eigen::Index n) const;
};

/// Checks the kernel and positivity invariants of `fric` at q against the
/// frame: nu f_a = 0 for a < k and the eta block of kappa^# nu^b has
/// eigenvalues with positive real part. Throws FrameNotAdapted or
/// SingularEtaBlock.
void validate_friction(const MechanicalSystem& sys, const MovingFrame& fr,
                       const RayleighFriction& fric, const Vector& q);

/// kappa^# nu^b expressed in the frame, lambda kappa^{-1} nu f (n x n).
Matrix frame_friction_operator(const MechanicalSystem& sys, const MovingFrame& fr,
                               const RayleighFriction& fric, const Vector& q);

/// First-order graph coefficient of the slow manifold eta = eps h1(q, xi) + O(eps^2).
struct ExpansionData {
  std::function<Vector(const Vector& q, const Vector& xi)> h1;
  MatrixField eta_block_operator;  ///< (kappa^# nu^b) restricted to the eta block
  MatrixField eta_block_inverse;
};

VectorField nonholonomic_field(const MechanicalSystem& sys, const MovingFrame& fr);
VectorField friction_field(const MechanicalSystem& sys, const MovingFrame& fr,
                           const RayleighFriction& fric, double eps);
VectorField friction_field_chart(const MechanicalSystem& sys, const RayleighFriction& fric, double eps);
/// Fast-time limit field: q' = 0, xi' = 0, eta' = -(kappa^# nu^b) eta.
VectorField fast_field_y0(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric);

ExpansionData compute_h1(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric);
VectorField first_order_field(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric);
/// X_NH + eps * X1; at eps = 0 this is nonholonomic_field itself.
VectorField corrected_field(const MechanicalSystem& sys, const MovingFrame& fr,
                            const RayleighFriction& fric, double eps);

/// E = 1/2 kappa(qdot, qdot) + V(q).
double energy_chart(const MechanicalSystem& sys, const Vector& q, const Vector& qdot);
/// Energy of a flat frame state (2n) or reduced state (n + k, eta = 0).
double energy_frame(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& x);

/// nu(qdot, qdot) >= 0.
double rayleigh_power(const RayleighFriction& fric, const Vector& q, const Vector& qdot);
double rayleigh_power_frame(const MovingFrame& fr, const RayleighFriction& fric, const Vector& x);

}  // namespace nonholib
