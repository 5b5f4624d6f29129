#pragma once

// Moving-frame geometry on a single chart: frame metrics, structure
// functions, connection coefficients and Christoffel symbols.
//
// Index conventions
//   Roman (chart) indices i, j, k run over the chart coordinates q^i.
//   Greek (frame) indices run over frame vectors f_alpha, with the
//   constraint block first: alpha < k spans D, alpha >= k spans D-perp.
//
//   connection(a, b, c) = omega^a_{bc}, defined by nabla_{f_c} f_b = omega^a_{bc} f_a
//   structure(a, b, c)  = C^a_{bc},     defined by [f_b, f_c]    = C^a_{bc} f_a
//   christoffel(i, j, k) = Gamma^i_{jk}

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "nonholib/ode.hpp"

namespace nonholib {

using ScalarField = std::function<double(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;
/// Partial derivatives of a matrix field: element k is d/dq^k.
using MatrixDerivField = std::function<std::vector<Matrix>(const Vector&)>;

/// Frame or chart singularity threshold on the 2-norm condition number.
inline constexpr double kSingularCondition = 1e12;
/// Central finite-difference step for derivative fallbacks.
inline constexpr double kFdStep = 1e-6;

/// Dense rank-3 array T(a, b, c) with all extents equal to n.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Eigen::Index n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

  Eigen::Index extent() const noexcept { return n_; }
  double operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return data_[index(a, b, c)];
  }
  double& operator()(Eigen::Index a, Eigen::Index b, Eigen::Index c) { return data_[index(a, b, c)]; }

  /// out^a = T(a, b, c) x^b y^c
  Vector contract(const Vector& x, const Vector& y) const;
  double max_abs() const;

 private:
  std::size_t index(Eigen::Index a, Eigen::Index b, Eigen::Index c) const {
    return static_cast<std::size_t>((a * n_ + b) * n_ + c);
  }
  Eigen::Index n_ = 0;
  std::vector<double> data_;
};

/// Lagrangian of mechanical type L = 1/2 kappa(qdot, qdot) - V(q) on one chart.
struct MechanicalSystem {
  Eigen::Index n = 0;
  MatrixField metric;
  MatrixDerivField metric_derivs;  ///< optional; central differences otherwise
  ScalarField potential;           ///< optional; zero otherwise
  VectorField potential_grad;      ///< optional; central differences of potential otherwise

  /// kappa(q); throws SingularMetric unless symmetric positive definite and
  /// well conditioned.
  Matrix metric_at(const Vector& q) const;
  std::vector<Matrix> metric_derivs_at(const Vector& q) const;
  double potential_at(const Vector& q) const;
  Vector potential_grad_at(const Vector& q) const;
};

/// Moving frame f(q) whose columns are the frame vectors in chart components.
struct MovingFrame {
  Eigen::Index n = 0;
  Eigen::Index k = 0;             ///< columns [0, k) span the constraint distribution D
  MatrixField fields;
  MatrixDerivField field_derivs;  ///< optional; element j is d f / d q^j
  MatrixField inverse;            ///< optional; LU inverse otherwise
  bool orthogonal = false;        ///< claims kappa-orthogonality across the k | n-k split

  /// f(q); throws SingularFrame if its condition number exceeds kSingularCondition.
  Matrix fields_at(const Vector& q) const;
  std::vector<Matrix> field_derivs_at(const Vector& q) const;
  Matrix inverse_at(const Vector& q) const;
};

/// Chart point together with quasi-velocities along D (xi) and D-perp (eta).
struct FrameState {
  Vector q;
  Vector xi;
  Vector eta;

  Vector velocity() const;  ///< (xi, eta) stacked
  Vector flat() const;      ///< (q, xi, eta) stacked
  static FrameState from_flat(const Vector& x, Eigen::Index n, Eigen::Index k);
};

/// All frame quantities at one chart point, computed once for reuse by the
/// vector-field constructors.
struct FramePoint {
  Matrix f;
  Matrix lambda;
  Matrix kappa;
  Matrix kappa_inv;
  Matrix kappa_f;      ///< kappa_{ab} = kappa(f_a, f_b)
  Matrix kappa_f_inv;
  std::vector<Matrix> df;
  std::vector<Matrix> dkappa;
  Tensor3 structure;   ///< C^a_{bc}
  Tensor3 connection;  ///< omega^a_{bc}
};

FramePoint evaluate_frame_point(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q);

/// kappa_{ab} = f_a^T kappa f_b.
Matrix frame_metric(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q);

/// Frame directional derivatives D(d, a, b) = f_d(kappa_{ab}).
Tensor3 frame_metric_directional(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q);

/// C^a_{bc} from lambda applied to the chart components of [f_b, f_c].
Tensor3 structure_functions(const MovingFrame& fr, const Vector& q);

/// Levi-Civita connection in the frame from the Koszul formula: frame
/// derivatives of kappa_{ab} plus structure-function terms.
Tensor3 connection_coefficients(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q);

/// Same connection obtained by transforming Christoffel symbols:
/// omega^a_{bc} = lambda^a_i Gamma^i_{jk} f^j_b f^k_c + lambda^a_i (d_k f^i_b) f^k_c.
Tensor3 connection_from_christoffel(const MechanicalSystem& sys, const MovingFrame& fr,
                                    const Vector& q);

Tensor3 christoffel(const MechanicalSystem& sys, const Vector& q);

FrameState chart_to_frame(const MovingFrame& fr, const Vector& q, const Vector& qdot);
std::pair<Vector, Vector> frame_to_chart(const MovingFrame& fr, const FrameState& state);

/// Geodesic quasi-velocity acceleration via the connection form,
/// vdot^a = -omega^a_{bc} v^b v^c.
Vector geodesic_rhs_conn(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q,
                         const Vector& v);

/// Geodesic quasi-velocity acceleration from the moving-frame Euler-Lagrange
/// equations written with structure functions:
/// vdot^a = -kappa^{ad} [ f_c(kappa_{db}) - 1/2 f_d(kappa_{bc}) - kappa_{ec} C^e_{bd} ] v^b v^c.
Vector geodesic_rhs_struct(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q,
                           const Vector& v);

/// Largest relative mismatch between analytic metric derivatives and central
/// differences with step kFdStep (zero when no analytic derivatives are given).
double metric_derivative_mismatch(const MechanicalSystem& sys, const Vector& q);
double frame_derivative_mismatch(const MovingFrame& fr, const Vector& q);

}  // namespace nonholib
