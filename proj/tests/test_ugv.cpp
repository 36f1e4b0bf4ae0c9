#include <gtest/gtest.h>

#include "mmpc/errors.hpp"
#include "mmpc/rotation.hpp"
#include "mmpc/ugv.hpp"
#include "test_support.hpp"

using namespace mmpc;
using mmpc::testing::Gen;
using mmpc::testing::max_abs;

namespace {

const SurfaceModel kHill({-0.02, 0.0, -0.02, 0.48, 0.0, -0.88});

Eigen::Vector3d lifted(const ReferencePoint& r) { return r.x.coords().head<3>(); }

Eigen::Matrix2d heading_of(const ReferencePoint& r) {
  return Eigen::Map<const Eigen::Matrix2d>(r.x.coords().data() + 3);
}

}  // namespace

TEST(Ugv, SlopeFactorsLieInUnitInterval) {
  Gen gen(91);
  for (int i = 0; i < 200; ++i) {
    const SurfaceModel s = gen.surface(0.5, 2.0);
    const Eigen::Vector2d xy = gen.vector(2, 5.0);
    const Eigen::Matrix2d R = so2_exp(gen.uniform(-3.1, 3.1));
    const double a = ugv_alpha(s, xy, R), b = ugv_beta(s, xy);
    EXPECT_GT(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_GT(b, 0.0);
    EXPECT_LE(b, 1.0);
    EXPECT_GE(a, b - 1e-15);
  }
}

TEST(Ugv, InclinedPlaneFactors) {
  const SurfaceModel plane({0, 0, 0, 1, 0, 0});
  EXPECT_NEAR(ugv_alpha(plane, {3, -2}, Eigen::Matrix2d::Identity()), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ugv_beta(plane, {3, -2}), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(ugv_alpha(plane, {3, -2}, so2_exp(M_PI / 2)), 1.0);
}

TEST(Ugv, JacobiansMatchFiniteDifferences) {
  Gen gen(92);
  for (int i = 0; i < 100; ++i) {
    const SurfaceModel s = gen.surface();
    const CanonicalSystem sys = ugv_system(s);
    const ManifoldPoint x = ugv_point(s, gen.vector(2, 3.0), gen.uniform(-3, 3));
    const Eigen::VectorXd u = Eigen::Vector2d(gen.uniform(0, 4), gen.uniform(-2, 2));
    const Eigen::MatrixXd fd_x = mmpc::testing::central_jacobian(
        [&](const Eigen::VectorXd& d) { return sys.f(sys.manifold.boxplus(x, d), u); }, 3);
    const Eigen::MatrixXd fd_u = mmpc::testing::central_jacobian(
        [&](const Eigen::VectorXd& d) { return sys.f(x, u + d); }, 2);
    EXPECT_LT(max_abs(sys.df_dx(x, u) - fd_x), 1e-7);
    EXPECT_LT(max_abs(sys.df_du(x, u) - fd_u), 1e-7);
  }
}

TEST(Ugv, StepStaysOnTheSurface) {
  Gen gen(93);
  const CanonicalSystem sys = ugv_system(kHill);
  ManifoldPoint x = ugv_point(kHill, {0, 0}, 0.3);
  for (int i = 0; i < 500; ++i) {
    x = step(sys, x, Eigen::Vector2d(gen.uniform(0, 4), gen.uniform(-2, 2)), 0.02);
    const Eigen::VectorXd c = x.coords();
    EXPECT_NEAR(c(2), kHill.height(c(0), c(1)), 1e-12);
    const Eigen::Matrix2d R = Eigen::Map<const Eigen::Matrix2d>(c.data() + 3);
    EXPECT_LT(max_abs(R.transpose() * R - Eigen::Matrix2d::Identity()), 1e-12);
  }
}

TEST(UgvReference, StraightLineOnFlatGround) {
  const SurfaceModel flat({0, 0, 0, 0, 0, 0});
  const double v = 1.5, dt = 0.02;
  const auto refs = ugv_reference(straight_path({1, 2}, 0.4), flat, v, dt, 50);
  ASSERT_EQ(refs.size(), 50u);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    EXPECT_NEAR(refs[k].u(0), v, 1e-9);
    EXPECT_NEAR(refs[k].u(1), 0.0, 1e-9);
    EXPECT_NEAR(so2_log(heading_of(refs[k])), 0.4, 1e-12);
    if (k > 0) EXPECT_NEAR((lifted(refs[k]) - lifted(refs[k - 1])).norm(), v * dt, 1e-12);
  }
}

TEST(UgvReference, CircleYawRateIsSpeedOverRadius) {
  const SurfaceModel flat({0, 0, 0, 0, 0, 0});
  const double v = 2.0, rho = 4.0, dt = 0.01;
  const auto refs = ugv_reference(circle_path({0, 0}, rho), flat, v, dt, 100);
  for (const auto& r : refs) {
    EXPECT_NEAR(r.u(1), v / rho, 1e-4);
    EXPECT_NEAR(r.u(0), v, 1e-9);
  }
}

TEST(UgvReference, HillSinePathIsStepConsistent) {
  const CanonicalSystem sys = ugv_system(kHill);
  const double v = 2.4, dt = 0.02;
  const auto refs = ugv_reference(sine_path({0, 0}, 0.0, 1.5, 20.0), kHill, v, dt, 600);
  for (std::size_t k = 0; k + 1 < refs.size(); ++k) {
    const ManifoldPoint next = step(sys, refs[k].x, refs[k].u, dt);
    EXPECT_LT(error_state(sys.manifold, next, refs[k + 1].x).norm(), 1e-9) << k;
    EXPECT_NEAR((lifted(refs[k + 1]) - lifted(refs[k])).norm(), v * dt, 1e-12);
  }
}

TEST(UgvReference, LimitsRejectInfeasiblePaths) {
  const SurfaceModel flat({0, 0, 0, 0, 0, 0});
  UgvReferenceLimits limits;
  limits.omega_max = 0.4;
  EXPECT_THROW(ugv_reference(circle_path({0, 0}, 2.0), flat, 1.0, 0.02, 10, limits),
               InfeasibleReferenceError);
  EXPECT_NO_THROW(ugv_reference(circle_path({0, 0}, 3.0), flat, 1.0, 0.02, 10, limits));
  limits = {};
  limits.v_max = 1.0;
  // The speed input is measured along the surface, so climbing a slope does not inflate it.
  const SurfaceModel plane({0, 0, 0, 1, 0, 0});
  const auto climb = ugv_reference(straight_path({0, 0}, 0.0), plane, 1.0 - 1e-9, 0.02, 10, limits);
  EXPECT_NEAR(climb.front().u(0), 1.0, 1e-8);
  EXPECT_THROW(ugv_reference(straight_path({0, 0}, 0.0), plane, 1.2, 0.02, 10, limits),
               InfeasibleReferenceError);
}

TEST(UgvReference, RejectsBadArguments) {
  const SurfaceModel flat({0, 0, 0, 0, 0, 0});
  EXPECT_THROW(ugv_reference(straight_path({0, 0}, 0), flat, 0.0, 0.02, 10), ContractViolation);
  EXPECT_THROW(ugv_reference(straight_path({0, 0}, 0), flat, 1.0, 0.0, 10), ContractViolation);
  EXPECT_THROW(ugv_reference(straight_path({0, 0}, 0), flat, 1.0, 0.02, 0), ContractViolation);
  EXPECT_THROW(circle_path({0, 0}, 0.0), ContractViolation);
  EXPECT_THROW(sine_path({0, 0}, 0, 1, 0), ContractViolation);
}
