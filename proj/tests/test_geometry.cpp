#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonholib/errors.hpp"
#include "nonholib/geometry.hpp"
#include "nonholib/systems.hpp"
#include "oracles.hpp"

using namespace nonholib;

namespace {

const SleighParams kSleigh{1.0, 1.0, 0.2};

MechanicalSystem euclidean(Eigen::Index n) {
  MechanicalSystem s;
  s.n = n;
  s.metric = [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); };
  return s;
}

MovingFrame identity_frame(Eigen::Index n, Eigen::Index k) {
  MovingFrame f;
  f.n = n;
  f.k = k;
  f.fields = [n](const Vector&) { return Matrix(Matrix::Identity(n, n)); };
  return f;
}

/// Euclidean plane in polar coordinates (r, theta); derivatives left to the FD fallback.
MechanicalSystem polar_plane() {
  MechanicalSystem s;
  s.n = 2;
  s.metric = [](const Vector& q) {
    Matrix g = Matrix::Identity(2, 2);
    g(1, 1) = q[0] * q[0];
    return g;
  };
  return s;
}

Vector sleigh_q(std::mt19937_64& rng) { return oracles::random_sleigh_position(rng); }

Vector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST(FrameMetric, SleighOrthogonalFrameIsDiagonal) {
  const Vector q = (Vector(3) << 0.3, -1.2, 0.7).finished();
  const Matrix k = frame_metric(sleigh_system(kSleigh), sleigh_ortho_frame(kSleigh), q);
  const double J = kSleigh.J();
  EXPECT_NEAR(k(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(k(1, 1), J, 1e-14);
  EXPECT_NEAR(k(2, 2), kSleigh.I * kSleigh.m / J, 1e-14);
  EXPECT_NEAR((k - Matrix(k.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(FrameMetric, SleighVelocityFrameCouplesVAndOmega) {
  const Vector q = (Vector(3) << 0.0, 0.0, 1.1).finished();
  const Matrix k = frame_metric(sleigh_system(kSleigh), sleigh_frame_uvw(kSleigh), q);
  // columns (u, omega | v)
  EXPECT_NEAR(k(0, 0), kSleigh.m, 1e-14);
  EXPECT_NEAR(k(1, 1), kSleigh.J(), 1e-14);
  EXPECT_NEAR(k(2, 2), kSleigh.m, 1e-14);
  EXPECT_NEAR(k(1, 2), kSleigh.m * kSleigh.a, 1e-14);
  EXPECT_NEAR(k(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(k(0, 2), 0.0, 1e-14);
}

TEST(FrameMetric, IdentityFrameOnEuclidean) {
  const Vector q = Vector::Constant(3, 0.4);
  EXPECT_TRUE(frame_metric(euclidean(3), identity_frame(3, 1), q).isApprox(Matrix::Identity(3, 3)));
}

TEST(FrameMetric, SingularFrameThrows) {
  MovingFrame f = identity_frame(2, 1);
  f.fields = [](const Vector&) { return Matrix((Matrix(2, 2) << 1, 1, 1, 1).finished()); };
  EXPECT_THROW(frame_metric(euclidean(2), f, Vector::Zero(2)), SingularFrame);
}

TEST(MechanicalSystem, NonPositiveMetricThrows) {
  MechanicalSystem s = euclidean(2);
  s.metric = [](const Vector&) { return Matrix((Matrix(2, 2) << 1, 0, 0, -1).finished()); };
  EXPECT_THROW(s.metric_at(Vector::Zero(2)), SingularMetric);
}

TEST(StructureFunctions, HolonomicFrameVanishes) {
  const Vector q = (Vector(3) << 0.1, 0.2, 0.3).finished();
  EXPECT_EQ(structure_functions(identity_frame(3, 2), q).max_abs(), 0.0);
}

TEST(StructureFunctions, SleighBracketMatchesFiniteDifferences) {
  const MovingFrame fr = sleigh_frame_uvw(kSleigh);
  const Vector q = (Vector(3) << 0.5, -0.2, 0.9).finished();
  const Tensor3 C = structure_functions(fr, q);
  // [f_u, f_omega] = -f_v; index order (u, omega | v)
  EXPECT_NEAR(C(2, 0, 1), -1.0, 1e-12);

  const std::function<Vector(const Vector&)> fields[3] = {oracles::sleigh_fu, oracles::sleigh_fw,
                                                          oracles::sleigh_fv};
  const Matrix inv = fr.fields_at(q).inverse();
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      const Vector comps = inv * oracles::lie_bracket_fd(fields[b], fields[c], q);
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(C(a, b, c), comps[a], 1e-8) << a << b << c;
    }
}

TEST(StructureFunctions, Antisymmetric) {
  std::mt19937_64 rng(7);
  const MovingFrame fr = sleigh_ortho_frame(kSleigh);
  for (int t = 0; t < 20; ++t) {
    const Tensor3 C = structure_functions(fr, sleigh_q(rng));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(C(a, b, c), -C(a, c, b), 1e-14);
  }
}

TEST(Connection, EuclideanIdentityFrameVanishes) {
  EXPECT_EQ(connection_coefficients(euclidean(3), identity_frame(3, 1), Vector::Ones(3)).max_abs(), 0.0);
}

TEST(Connection, TorsionFreeOnRandomSleighStates) {
  std::mt19937_64 rng(11);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  for (const MovingFrame& fr : {sleigh_ortho_frame(kSleigh), sleigh_frame_uvw(kSleigh)}) {
    for (int t = 0; t < 50; ++t) {
      const Vector q = sleigh_q(rng);
      const Tensor3 w = connection_coefficients(sys, fr, q);
      const Tensor3 C = structure_functions(fr, q);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) EXPECT_NEAR(w(a, c, b) - w(a, b, c), C(a, b, c), 1e-9);
    }
  }
}

TEST(Connection, MetricCompatibleInFrame) {
  // f_c(kappa_ab) = omega^d_{ac} kappa_db + omega^d_{bc} kappa_ad
  std::mt19937_64 rng(13);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  const MovingFrame fr = sleigh_frame_uvw(kSleigh);
  for (int t = 0; t < 20; ++t) {
    const Vector q = sleigh_q(rng);
    const Tensor3 w = connection_coefficients(sys, fr, q);
    const Tensor3 D = frame_metric_directional(sys, fr, q);
    const Matrix k = frame_metric(sys, fr, q);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          double rhs = 0.0;
          for (int d = 0; d < 3; ++d) rhs += w(d, a, c) * k(d, b) + w(d, b, c) * k(a, d);
          EXPECT_NEAR(D(c, a, b), rhs, 1e-9);
        }
  }
}

TEST(Connection, SleighPsiEquationCoefficient) {
  const Vector q = (Vector(3) << 0.0, 0.0, 0.4).finished();
  const Tensor3 w = connection_coefficients(sleigh_system(kSleigh), sleigh_ortho_frame(kSleigh), q);
  // psidot contains -(omega^psi_{u psi} + omega^psi_{psi u}) u psi
  EXPECT_NEAR(-(w(1, 0, 1) + w(1, 1, 0)), -kSleigh.m * kSleigh.a / kSleigh.J(), 1e-12);
}

TEST(Connection, ChristoffelRouteAgrees) {
  std::mt19937_64 rng(17);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  for (const MovingFrame& fr : {sleigh_ortho_frame(kSleigh), sleigh_frame_uvw(kSleigh)}) {
    for (int t = 0; t < 50; ++t) {
      const Vector q = sleigh_q(rng);
      const Tensor3 a = connection_coefficients(sys, fr, q);
      const Tensor3 b = connection_from_christoffel(sys, fr, q);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) EXPECT_NEAR(a(i, j, k), b(i, j, k), 1e-9);
    }
  }
}

TEST(Christoffel, EuclideanVanishes) { EXPECT_EQ(christoffel(euclidean(2), Vector::Ones(2)).max_abs(), 0.0); }

TEST(Christoffel, PolarCoordinates) {
  const double r = 1.7;
  const Tensor3 G = christoffel(polar_plane(), (Vector(2) << r, 0.3).finished());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(G(i, j, k), oracles::polar_christoffel(i, j, k, r), 1e-8);
}

TEST(ChartFrame, SleighAtZeroAngle) {
  const MovingFrame fr = sleigh_frame_uvw(kSleigh);
  const Vector q = (Vector(3) << 1.0, 2.0, 0.0).finished();
  const FrameState s = chart_to_frame(fr, q, (Vector(3) << 0.3, -0.4, 0.7).finished());
  EXPECT_NEAR(s.xi[0], 0.3, 1e-15);   // u
  EXPECT_NEAR(s.xi[1], 0.7, 1e-15);   // omega
  EXPECT_NEAR(s.eta[0], -0.4, 1e-15); // v
}

TEST(ChartFrame, SleighAtRightAngle) {
  const MovingFrame fr = sleigh_frame_uvw(kSleigh);
  const Vector q = (Vector(3) << 0.0, 0.0, M_PI / 2).finished();
  const FrameState s = chart_to_frame(fr, q, (Vector(3) << 0.3, -0.4, 0.0).finished());
  EXPECT_NEAR(s.xi[0], -0.4, 1e-15);  // u = ydot
  EXPECT_NEAR(s.eta[0], -0.3, 1e-15); // v = -xdot
}

TEST(ChartFrame, RoundTrip) {
  std::mt19937_64 rng(19);
  const MovingFrame fr = sleigh_ortho_frame(kSleigh);
  for (int t = 0; t < 50; ++t) {
    const Vector q = sleigh_q(rng);
    const Vector qdot = random_vector(rng, 3);
    const auto [q2, qdot2] = frame_to_chart(fr, chart_to_frame(fr, q, qdot));
    EXPECT_LT((q2 - q).norm(), 1e-12);
    EXPECT_LT((qdot2 - qdot).norm(), 1e-12);
  }
}

TEST(Frame, InverseTimesFieldsIsIdentity) {
  std::mt19937_64 rng(23);
  for (const MovingFrame& fr : {sleigh_ortho_frame(kSleigh), sleigh_frame_uvw(kSleigh)})
    for (int t = 0; t < 20; ++t) {
      const Vector q = sleigh_q(rng);
      EXPECT_LT((fr.inverse_at(q) * fr.fields_at(q) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Frame, AnalyticDerivativesMatchDifferences) {
  std::mt19937_64 rng(29);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  const MovingFrame polar = pendulum_polar_frame();
  const MechanicalSystem inertial = pendulum_inertial_system({9.81, 0.1});
  for (int t = 0; t < 20; ++t) {
    const Vector q = sleigh_q(rng);
    EXPECT_LT(metric_derivative_mismatch(sys, q), 1e-5);
    EXPECT_LT(frame_derivative_mismatch(sleigh_ortho_frame(kSleigh), q), 1e-5);
    const Vector p = random_vector(rng, 2) + Vector::Constant(2, 2.5);
    EXPECT_LT(frame_derivative_mismatch(polar, p), 1e-5);
    EXPECT_LT(metric_derivative_mismatch(inertial, p), 1e-5);
  }
}

TEST(Frame, OrthogonalFlagMatchesMetric) {
  std::mt19937_64 rng(31);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  const MovingFrame fr = sleigh_ortho_frame(kSleigh);
  ASSERT_TRUE(fr.orthogonal);
  for (int t = 0; t < 20; ++t) {
    const Matrix k = frame_metric(sys, fr, sleigh_q(rng));
    EXPECT_LT(k.topRightCorner(2, 1).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Geodesic, ZeroVelocity) {
  const Vector q = (Vector(3) << 0.0, 0.0, 0.3).finished();
  const MechanicalSystem sys = sleigh_system(kSleigh);
  const MovingFrame fr = sleigh_ortho_frame(kSleigh);
  EXPECT_EQ(geodesic_rhs_conn(sys, fr, q, Vector::Zero(3)).norm(), 0.0);
  EXPECT_EQ(geodesic_rhs_struct(sys, fr, q, Vector::Zero(3)).norm(), 0.0);
}

TEST(Geodesic, EuclideanIdentityFrameIsFree) {
  std::mt19937_64 rng(37);
  const Vector v = random_vector(rng, 3);
  EXPECT_EQ(geodesic_rhs_conn(euclidean(3), identity_frame(3, 2), Vector::Zero(3), v).norm(), 0.0);
  EXPECT_EQ(geodesic_rhs_struct(euclidean(3), identity_frame(3, 2), Vector::Zero(3), v).norm(), 0.0);
}

TEST(Geodesic, ConnectionAndStructureFormsAgree) {
  std::mt19937_64 rng(41);
  const MechanicalSystem sys = sleigh_system(kSleigh);
  for (const MovingFrame& fr : {sleigh_ortho_frame(kSleigh), sleigh_frame_uvw(kSleigh)})
    for (int t = 0; t < 100; ++t) {
      const Vector q = sleigh_q(rng);
      const Vector v = random_vector(rng, 3);
      EXPECT_LT((geodesic_rhs_conn(sys, fr, q, v) - geodesic_rhs_struct(sys, fr, q, v)).norm(), 1e-10);
    }
}

TEST(Geodesic, ConservesKineticEnergy) {
  const MechanicalSystem sys = sleigh_system(kSleigh);
  const MovingFrame fr = sleigh_frame_uvw(kSleigh);
  const VectorField free = [&](const Vector& x) -> Vector {
    Vector out(6);
    out.head(3) = fr.fields_at(x.head(3)) * x.tail(3);
    out.tail(3) = geodesic_rhs_conn(sys, fr, x.head(3), x.tail(3));
    return out;
  };
  auto kinetic = [&](const Vector& x) {
    return 0.5 * x.tail(3).dot(frame_metric(sys, fr, x.head(3)) * x.tail(3));
  };
  IntegratorConfig c;
  c.t1 = 5.0;
  c.sample_dt = 0.5;
  const Vector x0 = (Vector(6) << 0.0, 0.0, 0.2, 0.8, -0.6, 0.3).finished();
  const Trajectory tr = integrate(free, x0, c);
  for (const auto& s : tr.states()) EXPECT_NEAR(kinetic(s), kinetic(x0), 1e-10);
}
