#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nonholib/errors.hpp"
#include "nonholib/systems.hpp"
#include "oracles.hpp"

using namespace nonholib;

namespace {

const SleighParams kSleigh{1.0, 1.0, 0.2};

Vector chart(double x, double y, double xd = 0.0, double yd = 0.0) {
  return (Vector(4) << x, y, xd, yd).finished();
}

Trajectory run(const VectorField& f, const Vector& x0, double t1, double dt, double sample_dt) {
  IntegratorConfig c;
  c.dt = dt;
  c.t1 = t1;
  c.sample_dt = sample_dt;
  return integrate(f, x0, c);
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_NO_THROW(kSleigh.validate());
  EXPECT_THROW((SleighParams{0.0, 1.0, 0.2}.validate()), InvalidConfig);
  EXPECT_THROW((SleighParams{1.0, -1.0, 0.2}.validate()), InvalidConfig);
  EXPECT_THROW((SleighParams{1.0, 1.0, -0.1}.validate()), InvalidConfig);
  EXPECT_THROW((PendulumParams{0.0, 0.01}.validate()), InvalidConfig);
  EXPECT_THROW((PendulumParams{9.81, 0.0}.validate()), NonPositiveEpsilon);
}

TEST(SleighNh, Examples) {
  auto r = sleigh_nh_rhs(kSleigh, 0.0, 1.0);
  EXPECT_NEAR(r[0], 0.2, 1e-15);
  EXPECT_NEAR(r[1], 0.0, 1e-15);
  for (double c : {-2.0, 0.5, 3.0}) {
    r = sleigh_nh_rhs(kSleigh, c, 0.0);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.0);
  }
  r = sleigh_nh_rhs(kSleigh, 1.0, 1.0);
  EXPECT_NEAR(r[0], 0.2, 1e-15);
  EXPECT_NEAR(r[1], -5.0 / 26.0, 1e-15);
}

TEST(SleighNh, HalfEllipseMatchesClosedForm) {
  const VectorField f = [](const Vector& x) -> Vector {
    const auto r = sleigh_nh_rhs(kSleigh, x[0], x[1]);
    return (Vector(2) << r[0], r[1]).finished();
  };
  const Trajectory tr = run(f, (Vector(2) << -1.0, 0.5).finished(), 10.0, 1e-3, 0.5);
  const double c0 = 1.0 + kSleigh.J() * 0.25;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto [u, w] = oracles::sleigh_nh_closed_form(1.0, 1.0, 0.2, -1.0, 0.5, tr.times()[i]);
    EXPECT_NEAR(tr.states()[i][0], u, 1e-9);
    EXPECT_NEAR(tr.states()[i][1], w, 1e-9);
    const double c = tr.states()[i][0] * tr.states()[i][0] + kSleigh.J() * tr.states()[i][1] * tr.states()[i][1];
    EXPECT_NEAR(c, c0, 1e-9 * c0);
  }
}

TEST(SleighNh, ConvergesToPositiveAxis) {
  // The omega decay rate near (u*, 0) is m a u* / J, so |omega| < 1e-3 needs t of about 45.
  const auto [u, w] = oracles::sleigh_nh_closed_form(1.0, 1.0, 0.2, -1.0, 0.5, 60.0);
  const VectorField f = [](const Vector& x) -> Vector {
    const auto r = sleigh_nh_rhs(kSleigh, x[0], x[1]);
    return (Vector(2) << r[0], r[1]).finished();
  };
  const Trajectory tr = run(f, (Vector(2) << -1.0, 0.5).finished(), 60.0, 1e-3, 1.0);
  EXPECT_GT(tr.states().back()[0], 0.0);
  EXPECT_LT(std::abs(tr.states().back()[1]), 1e-3);
  EXPECT_NEAR(tr.states().back()[0], u, 1e-8);
  EXPECT_NEAR(tr.states().back()[1], w, 1e-8);
}

TEST(SleighConstraintForce, Examples) {
  EXPECT_EQ(sleigh_constraint_force(kSleigh, 1.3, 0.0, 0.0), 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const double u = d(rng), w = d(rng);
    const double wdot = sleigh_nh_rhs(kSleigh, u, w)[1];
    EXPECT_NEAR(sleigh_constraint_force(kSleigh, u, w, wdot), kSleigh.m * u * w * kSleigh.I / kSleigh.J(), 1e-12);
  }
}

TEST(SleighFriction, Examples) {
  const auto r = sleigh_friction_rhs(kSleigh, 0.01, 1.0, 0.0, 1.0);
  EXPECT_NEAR(r[1], -1.0, 1e-12);
  EXPECT_THROW(sleigh_friction_rhs(kSleigh, 0.0, 1.0, 0.0, 1.0), NonPositiveEpsilon);
  EXPECT_THROW(sleigh_friction_ortho_rhs(kSleigh, -1.0, 1.0, 0.0, 1.0), NonPositiveEpsilon);
}

TEST(SleighFriction, FrictionOffIsFreeBody) {
  const double u = 0.4, v = -0.7, w = 1.1;
  const auto r = sleigh_friction_rhs(kSleigh, 1e300, u, v, w);
  const Eigen::Vector3d ref = oracles::sleigh_sliding(1.0, 1.0, 0.2, 1e300, u, v, w);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r[static_cast<std::size_t>(i)], ref[i], 1e-12);
}

TEST(SleighFriction, OrthoFrameIsAChangeOfVariables) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const double eps = 0.01;
  for (int t = 0; t < 100; ++t) {
    const double u = d(rng), v = d(rng), w = d(rng);
    const auto a = sleigh_friction_rhs(kSleigh, eps, u, v, w);
    const auto b = sleigh_friction_ortho_rhs(kSleigh, eps, u, v, sleigh_psi(kSleigh, v, w));
    EXPECT_NEAR(a[0], b[0], 1e-10);
    EXPECT_NEAR(a[1], b[1], 1e-10);
    EXPECT_NEAR(a[2] + kSleigh.ortho_shift() * a[1], b[2], 1e-10);
  }
  EXPECT_NEAR(sleigh_omega(kSleigh, 0.3, sleigh_psi(kSleigh, 0.3, -0.8)), -0.8, 1e-15);
}

TEST(SleighFast, ClosedForm) {
  const double eps = 0.01, u = 0.9, w = -0.4;
  const double rho = sleigh_fast_rate(kSleigh, eps);
  EXPECT_NEAR(rho, kSleigh.J() / (kSleigh.I * kSleigh.m * eps), 1e-12);
  const double slaved = -u * w / rho;
  EXPECT_NEAR(slaved, eps * sleigh_h1_rhs(kSleigh, u, w), 1e-15);
  EXPECT_NEAR(sleigh_fast_closed_form(kSleigh, eps, u, w, 0.3, 1e3), slaved, 1e-15);
  EXPECT_NEAR(sleigh_fast_closed_form(kSleigh, eps, u, w, slaved, 0.37), slaved, 1e-15);
  EXPECT_EQ(sleigh_fast_closed_form(kSleigh, eps, u, w, 0.3, 0.0), 0.3);
  // solves vdot = -u w - rho v
  const double t = 0.01, h = 1e-7;
  const double vdot = (sleigh_fast_closed_form(kSleigh, eps, u, w, 0.3, t + h) -
                       sleigh_fast_closed_form(kSleigh, eps, u, w, 0.3, t - h)) / (2 * h);
  EXPECT_NEAR(vdot, -u * w - rho * sleigh_fast_closed_form(kSleigh, eps, u, w, 0.3, t), 1e-5);
}

TEST(SleighCorrection, Examples) {
  EXPECT_NEAR(sleigh_h1_rhs(kSleigh, 1.0, 1.0), -25.0 / 26.0, 1e-15);
  for (const auto& [u, psi] : {std::pair{0.0, 1.3}, std::pair{-0.7, 0.0}}) {
    const auto c = sleigh_x1_rhs(kSleigh, 0.1, 0.2, 0.3, u, psi);
    for (double x : c) EXPECT_EQ(std::abs(x), 0.0);
  }
}

TEST(SleighBuilders, ReferenceFieldsAgreeWithGenericPath) {
  std::mt19937_64 rng(7);
  const auto sys = sleigh_system(kSleigh);
  const auto fr = sleigh_ortho_frame(kSleigh);
  const auto fric = sleigh_friction(kSleigh);
  const VectorField gen_nh = nonholonomic_field(sys, fr);
  const VectorField gen_c = corrected_field(sys, fr, fric, 0.01);
  const VectorField ref_nh = sleigh_nh_reference(kSleigh);
  const VectorField ref_c = sleigh_corrected_reference(kSleigh, 0.01);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Vector3d q = oracles::random_sleigh_position(rng);
    const Eigen::Vector3d w = oracles::sleigh_velocity_in_ball(rng, 1.0, 1.0, 0.2, 2.0);
    Vector x(5);
    x << q, w.head(2);
    EXPECT_LT((gen_nh(x) - ref_nh(x)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((gen_c(x) - ref_c(x)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Pendulum, FrictionSettlesToVerticalSpeed) {
  const PendulumParams p{9.81, 1e-3};
  const Trajectory tr = run(make_pendulum(PendulumVariant::Friction, p), chart(0.0, -1.0), 2.0, 5e-5, 0.1);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_NEAR(tr.states()[i][0], 0.0, 1e-14);
    if (tr.times()[i] >= 0.5) EXPECT_NEAR(tr.states()[i][3], -p.eps * p.g, 0.05 * p.eps * p.g);
  }
}

TEST(Pendulum, InertialAcceleration) {
  for (double eps : {1e-3, 0.1}) {
    const PendulumParams p{9.81, eps};
    const VectorField f = make_pendulum(PendulumVariant::Inertial, p);
    const Vector d = f(chart(0.0, -1.3, 0.0, -0.2));
    EXPECT_NEAR(d[2], 0.0, 1e-12);
    EXPECT_NEAR(d[3], -p.g / (1.0 + 1.0 / eps), 1e-12);
  }
}

TEST(Pendulum, PotentialEquilibriumAtBottom) {
  const PendulumParams p{9.81, 1e-2};
  const VectorField f = make_pendulum(PendulumVariant::Potential, p);
  // the spring sags by eps g under gravity
  EXPECT_LT(f(chart(0.0, -(1.0 + p.eps * p.g))).norm(), 1e-12);
  const Trajectory tr = run(f, chart(0.0, -1.0), 10.0, 5e-4, 0.01);
  for (const auto& s : tr.states()) {
    EXPECT_NEAR(s[0], 0.0, 1e-14);
    EXPECT_NEAR(s[1], -1.0, 2.0 * p.eps * p.g + 1e-12);
  }
  EXPECT_NEAR(pendulum_potential_minimum(p), -p.g - 0.5 * p.eps * p.g * p.g, 1e-15);
}

TEST(Pendulum, PotentialStaysNearCircle) {
  for (double eps : {1e-2, 1e-3}) {
    const PendulumParams p{9.81, eps};
    const Vector x0 = chart(std::sqrt(0.5), -std::sqrt(0.5));
    const double e0 = p.g * x0[1] - pendulum_potential_minimum(p);
    const Trajectory tr = run(make_pendulum(PendulumVariant::Potential, p), x0, 10.0, eps / 20, 1e-3);
    double worst = 0.0;
    for (const auto& s : tr.states()) worst = std::max(worst, std::abs(std::hypot(s[0], s[1]) - 1.0));
    EXPECT_LE(worst, 1.05 * std::sqrt(2.0 * eps * e0));
  }
}

TEST(Pendulum, FrictionLeafDriftsOutward) {
  const PendulumParams p{9.81, 1e-2};
  const Trajectory tr =
      run(make_pendulum(PendulumVariant::Friction, p), chart(std::sqrt(0.5), -std::sqrt(0.5)), 10.0, 5e-4, 0.05);
  double prev = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double r = std::hypot(tr.states()[i][0], tr.states()[i][1]);
    if (tr.times()[i] >= 1.0) EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(Pendulum, OriginSingularity) {
  const PendulumParams p{9.81, 1e-2};
  for (auto v : {PendulumVariant::Potential, PendulumVariant::Friction, PendulumVariant::Inertial})
    EXPECT_THROW(make_pendulum(v, p)(chart(1e-9, 0.0)), OriginSingularity);
}

TEST(Pendulum, PolarFrameNonholonomicIsTheCirclePendulum) {
  // On the unit circle at angle theta from the bottom, the tangential speed obeys thetaddot = -g sin theta.
  const auto sys = pendulum_gravity_system(9.81);
  const auto fr = pendulum_polar_frame();
  const VectorField X = nonholonomic_field(sys, fr);
  const double th = 0.6;
  const Vector x = (Vector(3) << std::sin(th), -std::cos(th), 0.0).finished();
  EXPECT_NEAR(X(x)[2], -9.81 * std::sin(th), 1e-12);
}
