#include <gtest/gtest.h>

#include "mmpc/errors.hpp"
#include "mmpc/quadrotor.hpp"
#include "mmpc/rotation.hpp"
#include "test_support.hpp"

using namespace mmpc;
using mmpc::testing::Gen;
using mmpc::testing::max_abs;

namespace {

double step_mismatch(const CanonicalSystem& sys, const std::vector<ReferencePoint>& refs, double dt) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < refs.size(); ++k) {
    const ManifoldPoint next = step(sys, refs[k].x, refs[k].u, dt);
    worst = std::max(worst, error_state(sys.manifold, next, refs[k + 1].x).norm());
  }
  return worst;
}

}  // namespace

TEST(Quadrotor, StateRoundTrip) {
  Gen gen(81);
  QuadrotorState s;
  s.p = gen.vector(3);
  s.v = gen.vector(3);
  s.R = gen.rotation();
  const QuadrotorState back = quad_state(quad_point(s));
  EXPECT_EQ(back.p, s.p);
  EXPECT_EQ(back.v, s.v);
  EXPECT_EQ(back.R, s.R);
  EXPECT_EQ(quad_manifold().tangent_dim(), 9);
  EXPECT_EQ(quad_manifold().exogenous_dim(), 9);
  EXPECT_THROW(quad_state(euclidean_point(Eigen::VectorXd::Zero(9))), ContractViolation);
}

TEST(Quadrotor, ThrustBalancingGravityGivesZeroAcceleration) {
  Gen gen(82);
  const CanonicalSystem sys = quad_system();
  for (int i = 0; i < 20; ++i) {
    QuadrotorState s;
    s.R = Eigen::Matrix3d::Identity();
    s.v = gen.vector(3);
    Eigen::Vector4d u(9.81, 0, 0, 0);
    const Eigen::VectorXd f = sys.f(quad_point(s), u);
    EXPECT_EQ(f.segment<3>(3), Eigen::Vector3d::Zero());
    EXPECT_EQ(f.head<3>(), s.v);
  }
}

TEST(Quadrotor, JacobiansMatchFiniteDifferences) {
  Gen gen(83);
  const CanonicalSystem sys = quad_system();
  const Manifold& m = sys.manifold;
  for (int i = 0; i < 100; ++i) {
    QuadrotorState s;
    s.p = gen.vector(3);
    s.v = gen.vector(3, 3.0);
    s.R = gen.rotation();
    const ManifoldPoint x = quad_point(s);
    const Eigen::VectorXd u = Eigen::Vector4d(gen.uniform(0, 20), gen.normal(), gen.normal(), gen.normal());
    const Eigen::MatrixXd fd_x = mmpc::testing::central_jacobian(
        [&](const Eigen::VectorXd& d) { return sys.f(m.boxplus(x, d), u); }, 9);
    const Eigen::MatrixXd fd_u = mmpc::testing::central_jacobian(
        [&](const Eigen::VectorXd& d) { return sys.f(x, u + d); }, 4);
    EXPECT_LT(max_abs(sys.df_dx(x, u) - fd_x), 1e-7);
    EXPECT_LT(max_abs(sys.df_du(x, u) - fd_u), 1e-7);
  }
}

TEST(SpeedProfile, RampsSmoothlyAndIntegrates) {
  const SpeedProfile sp{5.0, 8.0};
  EXPECT_EQ(sp.speed(0.0), 0.0);
  EXPECT_DOUBLE_EQ(sp.speed(4.0), 2.5);
  EXPECT_EQ(sp.speed(8.0), 5.0);
  EXPECT_EQ(sp.speed(20.0), 5.0);
  // Trapezoid rule on a fine grid as an independent integral.
  double s = 0.0;
  const double h = 1e-4;
  for (double t = 0.0; t < 10.0 - 1e-12; t += h) {
    s += 0.5 * h * (sp.speed(t) + sp.speed(t + h));
    if (std::abs(t + h - 3.0) < 0.5 * h || std::abs(t + h - 10.0) < 0.5 * h) {
      EXPECT_NEAR(sp.distance(t + h), s, 1e-6);
    }
  }
  const double h2 = 1e-6;
  for (double t : {0.5, 2.0, 7.9, 9.0}) {
    EXPECT_NEAR((sp.distance(t + h2) - sp.distance(t - h2)) / (2 * h2), sp.speed(t), 1e-6);
  }
  const SpeedProfile constant{2.0, 0.0};
  EXPECT_EQ(constant.speed(0.0), 2.0);
  EXPECT_DOUBLE_EQ(constant.distance(1.5), 3.0);
}

TEST(QuadReference, HoverIsLevelWithGravityThrust) {
  const auto refs = quad_reference_sequence(hover_trajectory({1, 2, -3}), {}, 0.01, 5);
  for (const auto& r : refs) {
    const QuadrotorState s = quad_state(r.x);
    EXPECT_EQ(s.p, Eigen::Vector3d(1, 2, -3));
    EXPECT_EQ(s.v, Eigen::Vector3d::Zero());
    EXPECT_LT(max_abs(s.R - Eigen::Matrix3d::Identity()), 1e-15);
    EXPECT_DOUBLE_EQ(r.u(0), 9.81);
    EXPECT_EQ(r.u.tail<3>(), Eigen::Vector3d::Zero());
  }
}

TEST(QuadReference, CircleThrustMatchesCentripetalAcceleration) {
  const double r = 1.3, v = 5.0;
  const SpeedProfile sp{v, 0.0};
  const double expected = std::hypot(9.81, v * v / r);
  for (int k : {0, 10, 137}) {
    const ReferencePoint ref = quad_circle_reference(r, sp, YawPolicy::PathTangent, 1e-3, k);
    EXPECT_NEAR(ref.u(0), expected, 1e-3 * expected);
    const QuadrotorState s = quad_state(ref.x);
    EXPECT_NEAR(s.v.norm(), v, 1e-2);
    EXPECT_NEAR((s.p.head<2>()).norm(), r, 1e-12);
    // Yaw follows the tangent, so body x is aligned with the velocity in the horizontal plane.
    const Eigen::Vector2d heading = (s.R * Eigen::Vector3d::UnitX()).head<2>().normalized();
    EXPECT_GT(heading.dot(s.v.head<2>().normalized()), 0.999);
  }
  EXPECT_NEAR(v * v / r, 19.23, 0.01);
}

TEST(QuadReference, ConsecutivePointsAreStepConsistent) {
  const CanonicalSystem sys = quad_system();
  const double dt = 0.01;
  const auto circle =
      quad_reference_sequence(circle_trajectory(1.3, {5.0, 8.0}, YawPolicy::PathTangent), {}, dt, 1200);
  EXPECT_LT(step_mismatch(sys, circle, dt), 1e-9);
  const auto loop = quad_reference_sequence(loop_trajectory(1.5, 5.425, {0, 0, -3}), {}, dt, 200);
  EXPECT_LT(step_mismatch(sys, loop, dt), 1e-9);
  const auto fixed_yaw =
      quad_reference_sequence(circle_trajectory(2.0, {2.0, 0.0}, YawPolicy::FixedZero), {}, dt, 400);
  EXPECT_LT(step_mismatch(sys, fixed_yaw, dt), 1e-9);
}

TEST(QuadReference, LoopPassesInvertedAtTheTop) {
  const double r = 1.5, v = 5.425, dt = 0.01;
  const int top = static_cast<int>(std::round(M_PI * r / v / dt));
  const ReferencePoint ref = quad_reference(loop_trajectory(r, v), {}, dt, top);
  const QuadrotorState s = quad_state(ref.x);
  // Body z points up (negative inertial z) when inverted.
  EXPECT_LT((s.R * Eigen::Vector3d::UnitZ()).z(), -0.9);
  EXPECT_NEAR(ref.u(0), v * v / r - 9.81, 0.2);
}

TEST(QuadReference, FreeFallIsInfeasible) {
  // Falling with exactly g leaves no thrust direction.
  QuadTrajectory traj;
  traj.position = [](double t) { return Eigen::Vector3d(0, 0, 0.5 * 9.81 * t * t); };
  traj.hint = [](double) { return Eigen::Vector3d::UnitX().eval(); };
  EXPECT_THROW(quad_reference(traj, {}, 0.01, 3), InfeasibleReferenceError);
  // A loop too fast at the top would need thrust below 0.1 only near v^2 / r = g.
  const double v = std::sqrt(9.81 * 1.5);
  const int top = static_cast<int>(std::round(M_PI * 1.5 / v / 0.001));
  EXPECT_THROW(quad_reference(loop_trajectory(1.5, v), {}, 0.001, top), InfeasibleReferenceError);
}

TEST(QuadReference, RejectsBadArguments) {
  EXPECT_THROW(circle_trajectory(0.0, {1.0, 0.0}, YawPolicy::FixedZero), ContractViolation);
  EXPECT_THROW(loop_trajectory(-1.0, 1.0), ContractViolation);
  EXPECT_THROW(quad_reference(hover_trajectory({0, 0, 0}), {}, 0.0, 0), ContractViolation);
}
