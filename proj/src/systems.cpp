#include "nonholib/systems.hpp"

#include <cmath>

#include "nonholib/errors.hpp"

namespace nonholib {

namespace {

constexpr double kOriginRadius = 1e-8;

double checked_radius(const Vector& q) {
  const double r = std::hypot(q[0], q[1]);
  if (r < kOriginRadius) throw OriginSingularity("pendulum state too close to the origin");
  return r;
}

// P = q q^T / r^2 and its partials.
Matrix radial_projector(const Vector& q) {
  const double r = checked_radius(q);
  return (q.head(2) * q.head(2).transpose()) / (r * r);
}

std::vector<Matrix> radial_projector_derivs(const Vector& q) {
  const double r = checked_radius(q);
  const double r2 = r * r, r4 = r2 * r2;
  std::vector<Matrix> out(2, Matrix::Zero(2, 2));
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out[static_cast<std::size_t>(k)](i, j) =
            ((i == k ? q[j] : 0.0) + (j == k ? q[i] : 0.0)) / r2 - 2.0 * q[i] * q[j] * q[k] / r4;
  return out;
}

Matrix zeta_outer(double phi) {
  Vector zeta(3);
  zeta << -std::sin(phi), std::cos(phi), 0.0;
  return zeta * zeta.transpose();
}

}  // namespace

void SleighParams::validate() const {
  if (!(m > 0.0) || !(I > 0.0) || !(a >= 0.0))
    throw InvalidConfig("sleigh parameters need m > 0, I > 0, a >= 0");
}

void PendulumParams::validate() const {
  if (!(g > 0.0)) throw InvalidConfig("pendulum needs g > 0");
  if (!(eps > 0.0)) throw NonPositiveEpsilon("pendulum needs eps > 0");
}

std::array<double, 2> sleigh_nh_rhs(const SleighParams& p, double u, double omega) {
  return {p.a * omega * omega, -p.m * p.a * u * omega / p.J()};
}

double sleigh_constraint_force(const SleighParams& p, double u, double omega, double omegadot) {
  return p.m * (u * omega + p.a * omegadot);
}

std::array<double, 3> sleigh_friction_rhs(const SleighParams& p, double eps, double u, double v, double omega) {
  if (!(eps > 0.0)) throw NonPositiveEpsilon("sleigh friction needs eps > 0");
  Eigen::Matrix3d lhs;
  lhs << 1.0, 0.0, 0.0,
         0.0, 1.0, p.a,
         0.0, p.m * p.a, p.J();
  const Eigen::Vector3d rhs(v * omega + p.a * omega * omega,
                            -u * omega - v / (p.m * eps),
                            -p.m * p.a * u * omega);
  const Eigen::Vector3d sol = lhs.partialPivLu().solve(rhs);
  return {sol[0], sol[1], sol[2]};
}

std::array<double, 3> sleigh_friction_ortho_rhs(const SleighParams& p, double eps, double u, double v,
                                                double psi) {
  if (!(eps > 0.0)) throw NonPositiveEpsilon("sleigh friction needs eps > 0");
  const double m = p.m, I = p.I, a = p.a, J = p.J();
  const double udot = -(m * a * a - I) / J * v * psi - m * a * I / (J * J) * v * v + a * psi * psi;
  const double vdot = -u * psi + m * a / J * u * v - J / (eps * m * I) * v;
  const double psidot = -m * a / J * u * psi + m * m * a * a / (J * J) * u * v;
  return {udot, vdot, psidot};
}

double sleigh_psi(const SleighParams& p, double v, double omega) { return omega + p.ortho_shift() * v; }
double sleigh_omega(const SleighParams& p, double v, double psi) { return psi - p.ortho_shift() * v; }

double sleigh_fast_rate(const SleighParams& p, double eps) { return p.J() / (p.I * p.m * eps); }

double sleigh_fast_closed_form(const SleighParams& p, double eps, double u, double omega, double v0, double t) {
  const double rho = sleigh_fast_rate(p, eps);
  const double slaved = -u * omega / rho;
  return (v0 - slaved) * std::exp(-rho * t) + slaved;
}

double sleigh_h1_rhs(const SleighParams& p, double u, double psi) { return -p.sideways_mass() * u * psi; }

std::array<double, 5> sleigh_x1_rhs(const SleighParams& p, double /*x*/, double /*y*/, double phi, double u,
                                    double psi) {
  const double m = p.m, I = p.I, a = p.a, J = p.J();
  const double h = sleigh_h1_rhs(p, u, psi);
  // phidot = omega = psi - (m a / J) v, so a drift v = h turns the blade by -(m a / J) h.
  return {-h * std::sin(phi),
          h * std::cos(phi),
          I * m * m * a / (J * J) * u * psi,
          I * m * (m * a * a - I) / (J * J) * u * psi * psi,
          -I * m * m * m * a * a / (J * J * J) * u * u * psi};
}

MechanicalSystem sleigh_system(const SleighParams& p) {
  p.validate();
  MechanicalSystem sys;
  sys.n = 3;
  sys.metric = [p](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    Matrix k(3, 3);
    k << p.m, 0.0, -p.m * p.a * s,
         0.0, p.m, p.m * p.a * c,
         -p.m * p.a * s, p.m * p.a * c, p.J();
    return k;
  };
  sys.metric_derivs = [p](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    std::vector<Matrix> d(3, Matrix::Zero(3, 3));
    d[2] << 0.0, 0.0, -p.m * p.a * c,
            0.0, 0.0, -p.m * p.a * s,
            -p.m * p.a * c, -p.m * p.a * s, 0.0;
    return d;
  };
  sys.potential = [](const Vector&) { return 0.0; };
  sys.potential_grad = [](const Vector&) { return Vector(Vector::Zero(3)); };
  return sys;
}

MovingFrame sleigh_frame_uvw(const SleighParams& p) {
  p.validate();
  MovingFrame fr;
  fr.n = 3;
  fr.k = 2;
  fr.orthogonal = false;
  fr.fields = [](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    Matrix f(3, 3);
    f << c, 0.0, -s,
         s, 0.0, c,
         0.0, 1.0, 0.0;
    return f;
  };
  fr.field_derivs = [](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    std::vector<Matrix> d(3, Matrix::Zero(3, 3));
    d[2] << -s, 0.0, -c,
            c, 0.0, -s,
            0.0, 0.0, 0.0;
    return d;
  };
  fr.inverse = [](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    Matrix l(3, 3);
    l << c, s, 0.0,
         0.0, 0.0, 1.0,
         -s, c, 0.0;
    return l;
  };
  return fr;
}

MovingFrame sleigh_ortho_frame(const SleighParams& p) {
  p.validate();
  const double shift = p.ortho_shift();
  MovingFrame fr;
  fr.n = 3;
  fr.k = 2;
  fr.orthogonal = true;
  fr.fields = [shift](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    Matrix f(3, 3);
    f << c, 0.0, -s,
         s, 0.0, c,
         0.0, 1.0, -shift;
    return f;
  };
  fr.field_derivs = [](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    std::vector<Matrix> d(3, Matrix::Zero(3, 3));
    d[2] << -s, 0.0, -c,
            c, 0.0, -s,
            0.0, 0.0, 0.0;
    return d;
  };
  fr.inverse = [shift](const Vector& q) {
    const double s = std::sin(q[2]), c = std::cos(q[2]);
    // u = xdot c + ydot s, v = -xdot s + ydot c, psi = phidot + shift * v
    Matrix l(3, 3);
    l << c, s, 0.0,
         -shift * s, shift * c, 1.0,
         -s, c, 0.0;
    return l;
  };
  return fr;
}

RayleighFriction sleigh_friction(const SleighParams& p) {
  p.validate();
  RayleighFriction fric;
  fric.kernel_rank = 2;
  fric.nu = [](const Vector& q) { return zeta_outer(q[2]); };
  return fric;
}

VectorField sleigh_nh_reference(const SleighParams& p) {
  return [p](const Vector& x) -> Vector {
    const double phi = x[2], u = x[3], psi = x[4];
    const auto acc = sleigh_nh_rhs(p, u, psi);
    Vector out(5);
    out << u * std::cos(phi), u * std::sin(phi), psi, acc[0], acc[1];
    return out;
  };
}

VectorField sleigh_friction_reference(const SleighParams& p, double eps) {
  if (!(eps > 0.0)) throw NonPositiveEpsilon("sleigh friction needs eps > 0");
  return [p, eps](const Vector& x) -> Vector {
    const double phi = x[2], u = x[3], psi = x[4], v = x[5];
    const double s = std::sin(phi), c = std::cos(phi);
    const auto acc = sleigh_friction_ortho_rhs(p, eps, u, v, psi);
    Vector out(6);
    out << u * c - v * s, u * s + v * c, sleigh_omega(p, v, psi), acc[0], acc[2], acc[1];
    return out;
  };
}

VectorField sleigh_corrected_reference(const SleighParams& p, double eps) {
  return [p, eps](const Vector& x) -> Vector {
    const auto x1 = sleigh_x1_rhs(p, x[0], x[1], x[2], x[3], x[4]);
    Vector out = sleigh_nh_reference(p)(x);
    for (int i = 0; i < 5; ++i) out[i] += eps * x1[static_cast<std::size_t>(i)];
    return out;
  };
}

MechanicalSystem pendulum_gravity_system(double g) {
  MechanicalSystem sys;
  sys.n = 2;
  sys.metric = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  sys.metric_derivs = [](const Vector&) { return std::vector<Matrix>(2, Matrix::Zero(2, 2)); };
  sys.potential = [g](const Vector& q) { return g * q[1]; };
  sys.potential_grad = [g](const Vector&) {
    Vector d(2);
    d << 0.0, g;
    return d;
  };
  return sys;
}

MechanicalSystem pendulum_potential_system(const PendulumParams& p) {
  p.validate();
  MechanicalSystem sys = pendulum_gravity_system(p.g);
  sys.potential = [p](const Vector& q) {
    const double r = std::hypot(q[0], q[1]);
    return p.g * q[1] + (r - 1.0) * (r - 1.0) / (2.0 * p.eps);
  };
  sys.potential_grad = [p](const Vector& q) {
    const double r = checked_radius(q);
    const double k = (r - 1.0) / (p.eps * r);
    Vector d(2);
    d << k * q[0], p.g + k * q[1];
    return d;
  };
  return sys;
}

MechanicalSystem pendulum_inertial_system(const PendulumParams& p) {
  p.validate();
  MechanicalSystem sys = pendulum_gravity_system(p.g);
  const double eps = p.eps;
  sys.metric = [eps](const Vector& q) {
    return Matrix(Matrix::Identity(2, 2) + radial_projector(q) / eps);
  };
  sys.metric_derivs = [eps](const Vector& q) {
    auto d = radial_projector_derivs(q);
    for (auto& m : d) m /= eps;
    return d;
  };
  return sys;
}

RayleighFriction pendulum_radial_friction() {
  RayleighFriction fric;
  fric.kernel_rank = 1;
  fric.nu = [](const Vector& q) { return radial_projector(q); };
  return fric;
}

MovingFrame pendulum_polar_frame() {
  MovingFrame fr;
  fr.n = 2;
  fr.k = 1;
  fr.orthogonal = true;
  fr.fields = [](const Vector& q) {
    const double r = checked_radius(q);
    Matrix f(2, 2);
    f << -q[1] / r, q[0] / r,
         q[0] / r, q[1] / r;
    return f;
  };
  fr.field_derivs = [](const Vector& q) {
    const double r = checked_radius(q);
    const double x = q[0], y = q[1], r3 = r * r * r;
    std::vector<Matrix> d(2, Matrix::Zero(2, 2));
    // column 0: t_hat = (-y, x) / r, column 1: r_hat = (x, y) / r
    d[0] << x * y / r3, 1.0 / r - x * x / r3,
            1.0 / r - x * x / r3, -x * y / r3;
    d[1] << -1.0 / r + y * y / r3, -x * y / r3,
            -x * y / r3, 1.0 / r - y * y / r3;
    return d;
  };
  fr.inverse = [](const Vector& q) {
    const double r = checked_radius(q);
    Matrix l(2, 2);
    l << -q[1] / r, q[0] / r,
         q[0] / r, q[1] / r;
    return l;
  };
  return fr;
}

VectorField make_pendulum(PendulumVariant variant, const PendulumParams& p) {
  p.validate();
  VectorField field;
  switch (variant) {
    case PendulumVariant::Potential:
      field = friction_field_chart(pendulum_potential_system(p), RayleighFriction{}, 1.0);
      break;
    case PendulumVariant::Friction:
      field = friction_field_chart(pendulum_gravity_system(p.g), pendulum_radial_friction(), p.eps);
      break;
    case PendulumVariant::Inertial:
      field = friction_field_chart(pendulum_inertial_system(p), RayleighFriction{}, 1.0);
      break;
  }
  return [field](const Vector& x) -> Vector {
    checked_radius(x);
    return field(x);
  };
}

double pendulum_potential_minimum(const PendulumParams& p) {
  // Attained on the negative y axis at r = 1 + eps g.
  return -p.g - 0.5 * p.eps * p.g * p.g;
}

}  // namespace nonholib
