#include "nonholib/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nonholib/errors.hpp"

namespace nonholib {

namespace {

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

std::vector<Matrix> central_difference(const MatrixField& field, const Vector& q) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(q.size()));
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    Vector qp = q, qm = q;
    qp[k] += kFdStep;
    qm[k] -= kFdStep;
    out.push_back((field(qp) - field(qm)) / (2.0 * kFdStep));
  }
  return out;
}

double relative_mismatch(const std::vector<Matrix>& analytic, const std::vector<Matrix>& fd) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double scale = std::max(1.0, fd[k].cwiseAbs().maxCoeff());
    worst = std::max(worst, (analytic[k] - fd[k]).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

void require_dim(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << what << " has dimension " << v.size() << ", expected " << n;
    throw DimensionMismatch(msg.str());
  }
}

// dkappa_f[k] = d/dq^k (f^T kappa f)
std::vector<Matrix> frame_metric_partials(const Matrix& f, const Matrix& kappa,
                                          const std::vector<Matrix>& df,
                                          const std::vector<Matrix>& dkappa) {
  std::vector<Matrix> out;
  out.reserve(df.size());
  for (std::size_t k = 0; k < df.size(); ++k) {
    const Matrix kdf = kappa * df[k];
    out.push_back(df[k].transpose() * kappa * f + f.transpose() * dkappa[k] * f +
                  f.transpose() * kdf);
  }
  return out;
}

Tensor3 directional_from_partials(const Matrix& f, const std::vector<Matrix>& dkappa_f) {
  const Eigen::Index n = f.rows();
  Tensor3 d(n);
  for (Eigen::Index dl = 0; dl < n; ++dl)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) s += f(k, dl) * dkappa_f[static_cast<std::size_t>(k)](a, b);
        d(dl, a, b) = s;
      }
  return d;
}

Tensor3 structure_from(const Matrix& f, const Matrix& lambda, const std::vector<Matrix>& df) {
  const Eigen::Index n = f.rows();
  // bracket(i, b, c) = f_b^k d_k f_c^i - f_c^k d_k f_b^i
  Tensor3 bracket(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const Matrix& dk = df[static_cast<std::size_t>(k)];
          s += f(k, b) * dk(i, c) - f(k, c) * dk(i, b);
        }
        bracket(i, b, c) = s;
      }
  Tensor3 cst(n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += lambda(a, i) * bracket(i, b, c);
        cst(a, b, c) = s;
      }
  return cst;
}

Tensor3 koszul(const Matrix& kappa_f, const Matrix& kappa_f_inv, const Tensor3& d, const Tensor3& cst) {
  const Eigen::Index n = kappa_f.rows();
  // lowered(b, g, dl) = 2 kappa(nabla_{f_dl} f_g, f_b)
  Tensor3 lowered(n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index g = 0; g < n; ++g)
      for (Eigen::Index dl = 0; dl < n; ++dl) {
        double s = d(dl, g, b) + d(g, dl, b) - d(b, dl, g);
        for (Eigen::Index a = 0; a < n; ++a)
          s += kappa_f(a, b) * cst(a, dl, g) + kappa_f(a, g) * cst(a, b, dl) +
               kappa_f(a, dl) * cst(a, b, g);
        lowered(b, g, dl) = s;
      }
  Tensor3 omega(n);
  for (Eigen::Index e = 0; e < n; ++e)
    for (Eigen::Index g = 0; g < n; ++g)
      for (Eigen::Index dl = 0; dl < n; ++dl) {
        double s = 0.0;
        for (Eigen::Index b = 0; b < n; ++b) s += kappa_f_inv(e, b) * lowered(b, g, dl);
        omega(e, g, dl) = 0.5 * s;
      }
  return omega;
}

Tensor3 christoffel_from(const Matrix& kappa_inv, const std::vector<Matrix>& dkappa) {
  const Eigen::Index n = kappa_inv.rows();
  Tensor3 gamma(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = j; k < n; ++k) {
        double s = 0.0;
        for (Eigen::Index l = 0; l < n; ++l)
          s += kappa_inv(i, l) * (dkappa[static_cast<std::size_t>(j)](l, k) +
                                  dkappa[static_cast<std::size_t>(k)](l, j) -
                                  dkappa[static_cast<std::size_t>(l)](j, k));
        gamma(i, j, k) = 0.5 * s;
        gamma(i, k, j) = 0.5 * s;
      }
  return gamma;
}

Matrix checked_inverse_spd(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw SingularMetric("matrix is not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

Vector Tensor3::contract(const Vector& x, const Vector& y) const {
  Vector out = Vector::Zero(n_);
  for (Eigen::Index a = 0; a < n_; ++a) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < n_; ++b) {
      if (x[b] == 0.0) continue;
      double inner = 0.0;
      for (Eigen::Index c = 0; c < n_; ++c) inner += (*this)(a, b, c) * y[c];
      s += x[b] * inner;
    }
    out[a] = s;
  }
  return out;
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix MechanicalSystem::metric_at(const Vector& q) const {
  require_dim(q, n, "chart point");
  Matrix kappa = metric(q);
  if (kappa.rows() != n || kappa.cols() != n) throw DimensionMismatch("metric has wrong shape");
  const double scale = std::max(1.0, kappa.cwiseAbs().maxCoeff());
  if ((kappa - kappa.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw SingularMetric("metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(kappa, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(n - 1);
  if (!(lo > 0.0) || hi / lo > kSingularCondition)
    throw SingularMetric("metric is not positive definite or is ill conditioned");
  return kappa;
}

std::vector<Matrix> MechanicalSystem::metric_derivs_at(const Vector& q) const {
  if (metric_derivs) return metric_derivs(q);
  return central_difference(metric, q);
}

double MechanicalSystem::potential_at(const Vector& q) const { return potential ? potential(q) : 0.0; }

Vector MechanicalSystem::potential_grad_at(const Vector& q) const {
  if (potential_grad) return potential_grad(q);
  Vector g = Vector::Zero(n);
  if (!potential) return g;
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector qp = q, qm = q;
    qp[k] += kFdStep;
    qm[k] -= kFdStep;
    g[k] = (potential(qp) - potential(qm)) / (2.0 * kFdStep);
  }
  return g;
}

Matrix MovingFrame::fields_at(const Vector& q) const {
  require_dim(q, n, "chart point");
  Matrix f = fields(q);
  if (f.rows() != n || f.cols() != n) throw DimensionMismatch("frame has wrong shape");
  if (condition_number(f) > kSingularCondition) throw SingularFrame("frame is not invertible");
  return f;
}

std::vector<Matrix> MovingFrame::field_derivs_at(const Vector& q) const {
  if (field_derivs) return field_derivs(q);
  return central_difference(fields, q);
}

Matrix MovingFrame::inverse_at(const Vector& q) const {
  if (inverse) {
    fields_at(q);
    return inverse(q);
  }
  return fields_at(q).partialPivLu().inverse();
}

Vector FrameState::velocity() const {
  Vector v(xi.size() + eta.size());
  v << xi, eta;
  return v;
}

Vector FrameState::flat() const {
  Vector x(q.size() + xi.size() + eta.size());
  x << q, xi, eta;
  return x;
}

FrameState FrameState::from_flat(const Vector& x, Eigen::Index n, Eigen::Index k) {
  if (x.size() != 2 * n) throw DimensionMismatch("frame state must have dimension 2n");
  return FrameState{x.head(n), x.segment(n, k), x.segment(n + k, n - k)};
}

FramePoint evaluate_frame_point(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q) {
  if (sys.n != fr.n) throw DimensionMismatch("system and frame dimensions differ");
  FramePoint p;
  p.f = fr.fields_at(q);
  p.lambda = fr.inverse_at(q);
  p.kappa = sys.metric_at(q);
  p.kappa_inv = checked_inverse_spd(p.kappa);
  p.kappa_f = p.f.transpose() * p.kappa * p.f;
  p.kappa_f_inv = p.lambda * p.kappa_inv * p.lambda.transpose();
  p.df = fr.field_derivs_at(q);
  p.dkappa = sys.metric_derivs_at(q);
  const Tensor3 d = directional_from_partials(p.f, frame_metric_partials(p.f, p.kappa, p.df, p.dkappa));
  p.structure = structure_from(p.f, p.lambda, p.df);
  p.connection = koszul(p.kappa_f, p.kappa_f_inv, d, p.structure);
  return p;
}

Matrix frame_metric(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q) {
  const Matrix f = fr.fields_at(q);
  return f.transpose() * sys.metric_at(q) * f;
}

Tensor3 frame_metric_directional(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q) {
  const Matrix f = fr.fields_at(q);
  const Matrix kappa = sys.metric_at(q);
  return directional_from_partials(
      f, frame_metric_partials(f, kappa, fr.field_derivs_at(q), sys.metric_derivs_at(q)));
}

Tensor3 structure_functions(const MovingFrame& fr, const Vector& q) {
  const Matrix f = fr.fields_at(q);
  return structure_from(f, fr.inverse_at(q), fr.field_derivs_at(q));
}

Tensor3 connection_coefficients(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q) {
  return evaluate_frame_point(sys, fr, q).connection;
}

Tensor3 christoffel(const MechanicalSystem& sys, const Vector& q) {
  const Matrix kappa = sys.metric_at(q);
  return christoffel_from(checked_inverse_spd(kappa), sys.metric_derivs_at(q));
}

Tensor3 connection_from_christoffel(const MechanicalSystem& sys, const MovingFrame& fr,
                                    const Vector& q) {
  const Matrix f = fr.fields_at(q);
  const Matrix lambda = fr.inverse_at(q);
  const auto df = fr.field_derivs_at(q);
  const Tensor3 gamma = christoffel(sys, q);
  const Eigen::Index n = f.rows();

  // chart(i, b, c) = Gamma^i_{jk} f^j_b f^k_c + (d_k f^i_b) f^k_c
  Tensor3 chart(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index k = 0; k < n; ++k) s += gamma(i, j, k) * f(j, b) * f(k, c);
        for (Eigen::Index k = 0; k < n; ++k) s += df[static_cast<std::size_t>(k)](i, b) * f(k, c);
        chart(i, b, c) = s;
      }
  Tensor3 omega(n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += lambda(a, i) * chart(i, b, c);
        omega(a, b, c) = s;
      }
  return omega;
}

FrameState chart_to_frame(const MovingFrame& fr, const Vector& q, const Vector& qdot) {
  require_dim(qdot, fr.n, "chart velocity");
  const Vector v = fr.inverse_at(q) * qdot;
  return FrameState{q, v.head(fr.k), v.tail(fr.n - fr.k)};
}

std::pair<Vector, Vector> frame_to_chart(const MovingFrame& fr, const FrameState& state) {
  const Vector v = state.velocity();
  require_dim(v, fr.n, "quasi-velocity");
  return {state.q, fr.fields_at(state.q) * v};
}

Vector geodesic_rhs_conn(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q,
                         const Vector& v) {
  require_dim(v, fr.n, "quasi-velocity");
  return -connection_coefficients(sys, fr, q).contract(v, v);
}

Vector geodesic_rhs_struct(const MechanicalSystem& sys, const MovingFrame& fr, const Vector& q,
                           const Vector& v) {
  require_dim(v, fr.n, "quasi-velocity");
  const Matrix f = fr.fields_at(q);
  const Matrix lambda = fr.inverse_at(q);
  const Matrix kappa = sys.metric_at(q);
  const auto df = fr.field_derivs_at(q);
  const Tensor3 d = directional_from_partials(f, frame_metric_partials(f, kappa, df, sys.metric_derivs_at(q)));
  const Tensor3 cst = structure_from(f, lambda, df);
  const Matrix kappa_f = f.transpose() * kappa * f;
  const Eigen::Index n = fr.n;

  // lowered_d = [ f_c(kappa_{db}) - 1/2 f_d(kappa_{bc}) - kappa_{ec} C^e_{bd} ] v^b v^c
  Vector lowered = Vector::Zero(n);
  for (Eigen::Index dl = 0; dl < n; ++dl) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        double term = d(c, dl, b) - 0.5 * d(dl, b, c);
        for (Eigen::Index e = 0; e < n; ++e) term -= kappa_f(e, c) * cst(e, b, dl);
        s += term * v[b] * v[c];
      }
    lowered[dl] = s;
  }
  return -kappa_f.ldlt().solve(lowered);
}

double metric_derivative_mismatch(const MechanicalSystem& sys, const Vector& q) {
  if (!sys.metric_derivs) return 0.0;
  return relative_mismatch(sys.metric_derivs(q), central_difference(sys.metric, q));
}

double frame_derivative_mismatch(const MovingFrame& fr, const Vector& q) {
  if (!fr.field_derivs) return 0.0;
  return relative_mismatch(fr.field_derivs(q), central_difference(fr.fields, q));
}

}  // namespace nonholib
