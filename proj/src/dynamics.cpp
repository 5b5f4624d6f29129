#include "nonholib/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "nonholib/errors.hpp"

namespace nonholib {

namespace {

void require_positive_eps(double eps) {
  if (!(eps > 0.0)) {
    std::ostringstream msg;
    msg << "friction scale eps must be > 0, got " << eps;
    throw NonPositiveEpsilon(msg.str());
  }
}

// kappa-orthogonality of the k | n-k split, needed wherever the
// projections pr_xi / pr_eta are applied to accelerations.
void require_adapted(const FramePoint& p, Eigen::Index k) {
  const Eigen::Index n = p.kappa_f.rows();
  if (k == n || k == 0) return;
  const double scale = std::max(1.0, p.kappa_f.cwiseAbs().maxCoeff());
  if (p.kappa_f.topRightCorner(k, n - k).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw FrameNotAdapted("frame is not kappa-orthogonal across the D | D-perp split");
}

Vector potential_accel(const MechanicalSystem& sys, const FramePoint& p, const Vector& q) {
  return p.lambda * (p.kappa_inv * sys.potential_grad_at(q));
}

Matrix eta_block(const Matrix& op, Eigen::Index k) {
  const Eigen::Index m = op.rows() - k;
  return op.bottomRightCorner(m, m);
}

Matrix checked_block_inverse(const Matrix& block) {
  Eigen::JacobiSVD<Matrix> svd(block);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return block;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > kSingularCondition)
    throw SingularEtaBlock("eta block of the friction operator is not invertible");
  return block.inverse();
}

Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// -omega((xi,0))(xi,0) - lambda kappa^-1 dV, full n-vector.
Vector constrained_accel(const MechanicalSystem& sys, const FramePoint& p, const Vector& q,
                         const Vector& v0) {
  return -p.connection.contract(v0, v0) - potential_accel(sys, p, q);
}

Vector h1_at(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric,
             const FramePoint& p, const Vector& q, const Vector& xi) {
  const Eigen::Index n = fr.n, k = fr.k;
  const Vector v0 = stack(xi, Vector::Zero(n - k));
  const Vector g1 = constrained_accel(sys, p, q, v0).tail(n - k);
  const Matrix op = p.lambda * p.kappa_inv * fric.nu_at(q, n) * p.f;
  return checked_block_inverse(eta_block(op, k)) * g1;
}

// X1 at a reduced state, given the frame data at q.
Vector first_order_at(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric,
                      const FramePoint& p, const Vector& q, const Vector& xi) {
  const Eigen::Index n = fr.n, k = fr.k;
  const Vector h = h1_at(sys, fr, fric, p, q, xi);
  const Vector xi0 = stack(xi, Vector::Zero(n - k));
  const Vector h0 = stack(Vector::Zero(k), h);
  Vector out(n + k);
  out.head(n) = p.f * h0;
  // omega(f h) xi + omega(f xi) h, with omega(f X) Y = omega^a_{bc} Y^b X^c
  out.tail(k) = -(p.connection.contract(xi0, h0) + p.connection.contract(h0, xi0)).head(k);
  return out;
}

}  // namespace

Matrix RayleighFriction::nu_at(const Vector& q, Eigen::Index n) const {
  if (!nu) return Matrix::Zero(n, n);
  Matrix m = nu(q);
  if (m.rows() != n || m.cols() != n) throw DimensionMismatch("friction form has wrong shape");
  return m;
}

void validate_friction(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric,
                       const Vector& q) {
  if (fric.kernel_rank != fr.k) throw FrameNotAdapted("friction kernel rank differs from frame rank");
  const Matrix f = fr.fields_at(q);
  const Matrix nu = fric.nu_at(q, fr.n);
  const double scale = std::max(1.0, nu.cwiseAbs().maxCoeff());
  if ((nu * f.leftCols(fr.k)).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw FrameNotAdapted("friction form does not vanish on the constraint distribution");
  const Matrix block = eta_block(frame_friction_operator(sys, fr, fric, q), fr.k);
  Eigen::EigenSolver<Matrix> eig(block, false);
  for (Eigen::Index i = 0; i < block.rows(); ++i)
    if (!(eig.eigenvalues()(i).real() > 0.0))
      throw SingularEtaBlock("friction is not positive definite on D-perp");
  checked_block_inverse(block);
}

Matrix frame_friction_operator(const MechanicalSystem& sys, const MovingFrame& fr,
                               const RayleighFriction& fric, const Vector& q) {
  const Matrix f = fr.fields_at(q);
  const Matrix kappa = sys.metric_at(q);
  return fr.inverse_at(q) * kappa.ldlt().solve(fric.nu_at(q, fr.n) * f);
}

VectorField nonholonomic_field(const MechanicalSystem& sys, const MovingFrame& fr) {
  return [sys, fr](const Vector& x) -> Vector {
    const Eigen::Index n = fr.n, k = fr.k;
    if (x.size() != n + k) throw DimensionMismatch("reduced state must have dimension n + k");
    const Vector q = x.head(n);
    const FramePoint p = evaluate_frame_point(sys, fr, q);
    require_adapted(p, k);
    const Vector v0 = stack(x.tail(k), Vector::Zero(n - k));
    Vector out(n + k);
    out.head(n) = p.f * v0;
    out.tail(k) = constrained_accel(sys, p, q, v0).head(k);
    return out;
  };
}

VectorField friction_field(const MechanicalSystem& sys, const MovingFrame& fr,
                           const RayleighFriction& fric, double eps) {
  require_positive_eps(eps);
  return [sys, fr, fric, eps](const Vector& x) -> Vector {
    const Eigen::Index n = fr.n;
    if (x.size() != 2 * n) throw DimensionMismatch("frame state must have dimension 2n");
    const Vector q = x.head(n);
    const Vector v = x.tail(n);
    const FramePoint p = evaluate_frame_point(sys, fr, q);
    const Vector qdot = p.f * v;
    Vector out(2 * n);
    out.head(n) = qdot;
    out.tail(n) = -p.connection.contract(v, v) - potential_accel(sys, p, q) -
                  (p.lambda * (p.kappa_inv * (fric.nu_at(q, n) * qdot))) / eps;
    return out;
  };
}

VectorField friction_field_chart(const MechanicalSystem& sys, const RayleighFriction& fric, double eps) {
  require_positive_eps(eps);
  return [sys, fric, eps](const Vector& x) -> Vector {
    const Eigen::Index n = sys.n;
    if (x.size() != 2 * n) throw DimensionMismatch("chart state must have dimension 2n");
    const Vector q = x.head(n);
    const Vector v = x.tail(n);
    const Matrix kappa = sys.metric_at(q);
    const Tensor3 gamma = christoffel(sys, q);
    Vector force = -sys.potential_grad_at(q);
    if (fric.nu) force -= fric.nu_at(q, n) * v / eps;
    Vector out(2 * n);
    out.head(n) = v;
    out.tail(n) = -gamma.contract(v, v) + kappa.ldlt().solve(force);
    return out;
  };
}

VectorField fast_field_y0(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric) {
  return [sys, fr, fric](const Vector& x) -> Vector {
    const Eigen::Index n = fr.n, k = fr.k;
    if (x.size() != 2 * n) throw DimensionMismatch("frame state must have dimension 2n");
    const Vector q = x.head(n);
    const Matrix block = eta_block(frame_friction_operator(sys, fr, fric, q), k);
    Vector out = Vector::Zero(2 * n);
    out.tail(n - k) = -block * x.tail(n - k);
    return out;
  };
}

ExpansionData compute_h1(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric) {
  ExpansionData data;
  data.h1 = [sys, fr, fric](const Vector& q, const Vector& xi) -> Vector {
    if (q.size() != fr.n || xi.size() != fr.k) throw DimensionMismatch("h1 expects (q[n], xi[k])");
    const FramePoint p = evaluate_frame_point(sys, fr, q);
    require_adapted(p, fr.k);
    return h1_at(sys, fr, fric, p, q, xi);
  };
  data.eta_block_operator = [sys, fr, fric](const Vector& q) -> Matrix {
    return eta_block(frame_friction_operator(sys, fr, fric, q), fr.k);
  };
  data.eta_block_inverse = [sys, fr, fric](const Vector& q) -> Matrix {
    return checked_block_inverse(eta_block(frame_friction_operator(sys, fr, fric, q), fr.k));
  };
  return data;
}

VectorField first_order_field(const MechanicalSystem& sys, const MovingFrame& fr, const RayleighFriction& fric) {
  return [sys, fr, fric](const Vector& x) -> Vector {
    const Eigen::Index n = fr.n, k = fr.k;
    if (x.size() != n + k) throw DimensionMismatch("reduced state must have dimension n + k");
    const Vector q = x.head(n);
    const FramePoint p = evaluate_frame_point(sys, fr, q);
    require_adapted(p, k);
    return first_order_at(sys, fr, fric, p, q, x.tail(k));
  };
}

VectorField corrected_field(const MechanicalSystem& sys, const MovingFrame& fr,
                            const RayleighFriction& fric, double eps) {
  if (!(eps >= 0.0)) throw NonPositiveEpsilon("corrected field needs eps >= 0");
  if (eps == 0.0) return nonholonomic_field(sys, fr);
  return [sys, fr, fric, eps](const Vector& x) -> Vector {
    const Eigen::Index n = fr.n, k = fr.k;
    if (x.size() != n + k) throw DimensionMismatch("reduced state must have dimension n + k");
    const Vector q = x.head(n);
    const FramePoint p = evaluate_frame_point(sys, fr, q);
    require_adapted(p, k);
    const Vector v0 = stack(x.tail(k), Vector::Zero(n - k));
    Vector out(n + k);
    out.head(n) = p.f * v0;
    out.tail(k) = constrained_accel(sys, p, q, v0).head(k);
    return out + eps * first_order_at(sys, fr, fric, p, q, x.tail(k));
  };
}

double energy_chart(const MechanicalSystem& sys, const Vector& q, const Vector& qdot) {
  return 0.5 * qdot.dot(sys.metric_at(q) * qdot) + sys.potential_at(q);
}

double energy_frame(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& x) {
  const Eigen::Index n = fr.n;
  Vector v = Vector::Zero(n);
  if (x.size() == 2 * n) {
    v = x.tail(n);
  } else if (x.size() == n + fr.k) {
    v.head(fr.k) = x.tail(fr.k);
  } else {
    throw DimensionMismatch("energy_frame expects a frame or reduced state");
  }
  const Vector q = x.head(n);
  return energy_chart(sys, q, fr.fields_at(q) * v);
}

double rayleigh_power(const RayleighFriction& fric, const Vector& q, const Vector& qdot) {
  if (!fric.nu) return 0.0;
  return qdot.dot(fric.nu_at(q, qdot.size()) * qdot);
}

double rayleigh_power_frame(const MovingFrame& fr, const RayleighFriction& fric, const Vector& x) {
  const Eigen::Index n = fr.n;
  if (x.size() != 2 * n) throw DimensionMismatch("rayleigh_power_frame expects a frame state");
  const Vector q = x.head(n);
  return rayleigh_power(fric, q, fr.fields_at(q) * x.tail(n));
}

}  // namespace nonholib
