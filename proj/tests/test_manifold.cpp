#include <gtest/gtest.h>

#include <numbers>

#include "mmpc/errors.hpp"
#include "mmpc/manifold.hpp"
#include "test_support.hpp"

using namespace mmpc;
using mmpc::testing::Gen;
using mmpc::testing::central_jacobian;
using mmpc::testing::expm_series;
using mmpc::testing::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

const SurfaceModel kBowl({1.0, 0.0, 1.0, 0.0, 0.0, 0.0});  // x^2 + y^2

std::vector<Manifold> all_manifolds() {
  const SurfaceModel hill({-0.2, 0.05, -0.1, 0.3, -0.2, 1.0});
  return {Manifold::euclidean(3),
          Manifold::rot2(),
          Manifold::rot3(),
          Manifold::sphere2(1.0),
          Manifold::sphere2(2.5),
          Manifold::surface(hill),
          Manifold::product({Manifold::euclidean(3), Manifold::euclidean(3), Manifold::rot3()}),
          Manifold::product({Manifold::surface(hill), Manifold::rot2()})};
}

double ambient_gap(const ManifoldPoint& a, const ManifoldPoint& b) {
  return (a.coords() - b.coords()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd fd_gx(const Manifold& m, const ManifoldPoint& x, const Eigen::VectorXd& v) {
  const ManifoldPoint base = m.oplus(x, v);
  return central_jacobian(
      [&](const Eigen::VectorXd& d) { return m.boxminus(m.oplus(m.boxplus(x, d), v), base); },
      m.tangent_dim());
}

Eigen::MatrixXd fd_gf(const Manifold& m, const ManifoldPoint& x, const Eigen::VectorXd& v) {
  const ManifoldPoint base = m.oplus(x, v);
  return central_jacobian([&](const Eigen::VectorXd& d) { return m.boxminus(m.oplus(x, v + d), base); },
                          m.exogenous_dim());
}

}  // namespace

TEST(ManifoldDims, TangentExogenousAmbient) {
  struct Row {
    Manifold m;
    int n, l, a;
  };
  const std::vector<Row> rows{{Manifold::euclidean(4), 4, 4, 4},
                              {Manifold::rot2(), 1, 1, 4},
                              {Manifold::rot3(), 3, 3, 9},
                              {Manifold::sphere2(2.0), 2, 3, 3},
                              {Manifold::surface(kBowl), 2, 2, 3}};
  for (const auto& r : rows) {
    EXPECT_EQ(r.m.tangent_dim(), r.n) << r.m.name();
    EXPECT_EQ(r.m.exogenous_dim(), r.l) << r.m.name();
    EXPECT_EQ(r.m.ambient_dim(), r.a) << r.m.name();
  }
}

TEST(ManifoldDims, VehicleProducts) {
  const Manifold quad =
      Manifold::product({Manifold::euclidean(3), Manifold::euclidean(3), Manifold::rot3()});
  EXPECT_EQ(quad.tangent_dim(), 9);
  EXPECT_EQ(quad.exogenous_dim(), 9);
  const Manifold ugv = Manifold::product({Manifold::surface(kBowl), Manifold::rot2()});
  EXPECT_EQ(ugv.tangent_dim(), 3);
  EXPECT_EQ(ugv.exogenous_dim(), 3);
  EXPECT_EQ(ugv.tangent_offset(1), 2);
  EXPECT_EQ(ugv.ambient_offset(1), 3);
}

TEST(ManifoldDims, EmptyProductIsRejected) {
  EXPECT_THROW(Manifold::product({}), ContractViolation);
}

TEST(ManifoldAxioms, HoldForEveryManifold) {
  Gen gen(31);
  for (const Manifold& m : all_manifolds()) {
    const int n = m.tangent_dim();
    for (int i = 0; i < 1000; ++i) {
      const ManifoldPoint x = gen.point(m);
      const Eigen::VectorXd d = gen.ball(n, 0.5);
      EXPECT_LT(ambient_gap(m.boxplus(x, Eigen::VectorXd::Zero(n)), x), 1e-12) << m.name();
      EXPECT_LT((m.boxminus(m.boxplus(x, d), x) - d).cwiseAbs().maxCoeff(), 1e-9) << m.name();
      const ManifoldPoint y = m.boxplus(x, gen.ball(n, 1.5));
      EXPECT_LT(ambient_gap(m.boxplus(x, m.boxminus(y, x)), y), 1e-9) << m.name();
    }
  }
}

TEST(ManifoldAxioms, SelfDifferenceIsZero) {
  Gen gen(32);
  for (const Manifold& m : all_manifolds()) {
    const ManifoldPoint x = gen.point(m);
    EXPECT_LT(m.boxminus(x, x).cwiseAbs().maxCoeff(), 1e-15) << m.name();
  }
}

TEST(Boxplus, Examples) {
  const Manifold r3 = Manifold::euclidean(3);
  EXPECT_EQ(r3.boxplus(euclidean_point(Eigen::Vector3d(1, 2, 3)), Eigen::Vector3d(0.1, 0, 0)).coords(),
            Eigen::Vector3d(1.1, 2, 3));

  const Manifold so3 = Manifold::rot3();
  EXPECT_EQ(so3.boxplus(so3.origin(), Eigen::Vector3d::Zero()).rot3(), Eigen::Matrix3d::Identity());

  const Manifold bowl = Manifold::surface(kBowl);
  const ManifoldPoint p = bowl.point(Eigen::Vector3d(1, 0, 1));
  EXPECT_LT((bowl.boxplus(p, Eigen::Vector2d(0.5, 0)).coords() - Eigen::Vector3d(1.5, 0, 2.25)).norm(),
            1e-15);
}

TEST(Boxplus, Rot3RejectsPerturbationsBeyondPi) {
  const Manifold so3 = Manifold::rot3();
  EXPECT_THROW(so3.boxplus(so3.origin(), Eigen::Vector3d(0, 0, kPi)), OutOfChartError);
  EXPECT_NO_THROW(so3.boxplus(so3.origin(), Eigen::Vector3d(0, 0, kPi - 0.01)));
}

TEST(Boxplus, DimensionMismatchIsAContractViolation) {
  const Manifold so3 = Manifold::rot3();
  EXPECT_THROW(so3.boxplus(so3.origin(), Eigen::Vector2d(0, 0)), ContractViolation);
  EXPECT_THROW(so3.boxminus(so3.origin(), Manifold::rot2().origin()), ContractViolation);
  EXPECT_THROW(Manifold::sphere2(1.0).oplus(Manifold::sphere2(1.0).origin(), Eigen::Vector2d(0, 0)),
               ContractViolation);
}

TEST(Boxminus, Examples) {
  const Manifold so3 = Manifold::rot3();
  const ManifoldPoint y = rot3_point(so3_exp(Eigen::Vector3d(0, 0, 0.3)));
  EXPECT_LT((so3.boxminus(y, so3.origin()) - Eigen::Vector3d(0, 0, 0.3)).norm(), 1e-15);

  const Manifold s2 = Manifold::sphere2(1.0);
  const Eigen::VectorXd d = s2.boxminus(sphere_point(Eigen::Vector3d::UnitX()),
                                        sphere_point(Eigen::Vector3d::UnitZ()));
  EXPECT_NEAR(d.norm(), kPi / 2, 1e-12);
}

TEST(Boxminus, SphereDistanceIsTheGreatCircleArc) {
  Gen gen(33);
  const double r = 1.7;
  const Manifold s2 = Manifold::sphere2(r);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d a = gen.unit3();
    const Eigen::Vector3d b = gen.unit3();
    if (a.dot(b) < -0.99) continue;
    const double arc = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    EXPECT_NEAR(s2.boxminus(sphere_point(r * b), sphere_point(r * a)).norm(), arc, 1e-7);
  }
}

TEST(Boxminus, CutLocusIsOutOfChart) {
  const Manifold s2 = Manifold::sphere2(1.0);
  EXPECT_THROW(s2.boxminus(sphere_point(-Eigen::Vector3d::UnitZ()), sphere_point(Eigen::Vector3d::UnitZ())),
               OutOfChartError);
  const Manifold so3 = Manifold::rot3();
  EXPECT_THROW(so3.boxminus(rot3_point(Eigen::Vector3d(1, -1, -1).asDiagonal()), so3.origin()),
               OutOfChartError);
}

TEST(Oplus, Examples) {
  const Manifold r4 = Manifold::euclidean(4);
  const Eigen::Vector4d x(1, 2, 3, 4), d(0.5, -1, 0, 2);
  EXPECT_EQ(r4.oplus(euclidean_point(x), d).coords(), x + d);

  const Manifold s2 = Manifold::sphere2(1.0);
  const ManifoldPoint y = s2.oplus(sphere_point(Eigen::Vector3d::UnitZ()), Eigen::Vector3d(kPi / 2, 0, 0));
  const Eigen::Matrix3d oracle = expm_series(skew(Eigen::Vector3d(kPi / 2, 0, 0)), 30);
  EXPECT_LT((y.vec3() - Eigen::Vector3d(0, -1, 0)).norm(), 1e-9);
  EXPECT_LT((y.vec3() - oracle * Eigen::Vector3d::UnitZ()).norm(), 1e-9);

  const Manifold so2 = Manifold::rot2();
  EXPECT_NEAR(so2_log(so2.oplus(so2.origin(), Eigen::VectorXd::Constant(1, 0.2)).rot2()), 0.2, 1e-15);
}

TEST(Oplus, EqualsBoxplusOnGroupsAndSurfaces) {
  Gen gen(34);
  for (const Manifold& m : {Manifold::euclidean(2), Manifold::rot2(), Manifold::rot3(),
                            Manifold::surface(kBowl)}) {
    for (int i = 0; i < 50; ++i) {
      const ManifoldPoint x = gen.point(m);
      const Eigen::VectorXd d = gen.ball(m.tangent_dim(), 1.0);
      EXPECT_LT(ambient_gap(m.oplus(x, d), m.boxplus(x, d)), 1e-15) << m.name();
    }
  }
}

TEST(Sphere, BoxplusAndOplusPreserveTheRadius) {
  Gen gen(35);
  for (double r : {0.5, 1.0, 3.0}) {
    const Manifold s2 = Manifold::sphere2(r);
    for (int i = 0; i < 300; ++i) {
      const ManifoldPoint x = gen.point(s2);
      EXPECT_NEAR(s2.boxplus(x, gen.ball(2, 2.0)).vec3().norm(), r, 1e-12 * r);
      EXPECT_NEAR(s2.oplus(x, gen.ball(3, 2.0)).vec3().norm(), r, 1e-12 * r);
    }
  }
}

TEST(S2Basis, AlignedAxisSpansTheOtherTwo) {
  const Eigen::Matrix<double, 3, 2> B = s2_basis(2.0 * Eigen::Vector3d::UnitZ());
  EXPECT_LT(max_abs(B.row(2)), 1e-15);
  EXPECT_LT(max_abs(B.transpose() * B - Eigen::Matrix2d::Identity()), 1e-15);
}

TEST(S2Basis, OrthonormalTangentRightHanded) {
  Gen gen(36);
  for (int i = 0; i < 1000; ++i) {
    const double r = gen.uniform(0.1, 5.0);
    const Eigen::Vector3d x = r * gen.unit3();
    const Eigen::Matrix<double, 3, 2> B = s2_basis(x);
    EXPECT_LT(max_abs(B.transpose() * B - Eigen::Matrix2d::Identity()), 1e-12);
    EXPECT_LT(max_abs(B.transpose() * x), 1e-9 * r);
    EXPECT_GT(B.col(0).cross(B.col(1)).dot(x), 0.0);
    EXPECT_EQ(s2_basis(x), B);
  }
}

TEST(S2Basis, NegativeAxesAreHandled) {
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::Vector3d x = -Eigen::Vector3d::Unit(axis);
    const Eigen::Matrix<double, 3, 2> B = s2_basis(x);
    EXPECT_LT(max_abs(B.transpose() * B - Eigen::Matrix2d::Identity()), 1e-15);
    EXPECT_LT(max_abs(B.transpose() * x), 1e-15);
    EXPECT_NEAR(B.col(0).cross(B.col(1)).dot(x), 1.0, 1e-15);
  }
}

TEST(S2Basis, RoundTripWithinOneHemisphere) {
  Gen gen(37);
  const Manifold s2 = Manifold::sphere2(1.0);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d a = gen.unit3();
    Eigen::Vector3d b = gen.unit3();
    if (a.dot(b) < 0) b = -b;
    const ManifoldPoint x = sphere_point(a), y = sphere_point(b);
    EXPECT_LT(ambient_gap(s2.boxplus(x, s2.boxminus(y, x)), y), 1e-9);
  }
}

TEST(GBlocks, ClosedFormExamples) {
  const Manifold so3 = Manifold::rot3();
  const ManifoldPoint I = so3.origin();
  EXPECT_LT(max_abs(so3.gx(I, Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()), 1e-15);
  EXPECT_LT(max_abs(so3.gf(I, Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity()), 1e-15);

  const Eigen::Vector3d v(0.2, 0, 0);
  EXPECT_LT(max_abs(so3.gx(I, v) - so3_exp(-v)), 1e-15);
  EXPECT_LT(max_abs(fd_gx(so3, I, v) - so3_exp(-v)), 1e-6);

  const Eigen::Vector3d w(0.3, -0.1, 0.2);
  EXPECT_LT(max_abs(so3.gf(I, w) - a_matrix(w).transpose()), 1e-15);
  EXPECT_LT(max_abs(fd_gf(so3, I, w) - a_matrix(w).transpose()), 1e-6);

  Gen gen(38);
  const Manifold r5 = Manifold::euclidean(5);
  const Manifold bowl = Manifold::surface(kBowl);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(r5.gx(gen.point(r5), gen.vector(5)), Eigen::MatrixXd::Identity(5, 5));
    EXPECT_EQ(bowl.gf(gen.point(bowl), gen.vector(2)), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_EQ(bowl.gx(gen.point(bowl), gen.vector(2)), Eigen::MatrixXd::Identity(2, 2));
  }
  EXPECT_EQ(Manifold::rot2().gx(Manifold::rot2().origin(), Eigen::VectorXd::Constant(1, 0.4)),
            Eigen::MatrixXd::Identity(1, 1));
}

TEST(GBlocks, MatchFiniteDifferencesOfTheirDefiningMaps) {
  Gen gen(39);
  for (const Manifold& m : all_manifolds()) {
    for (int i = 0; i < 200; ++i) {
      const ManifoldPoint x = gen.point(m);
      const Eigen::VectorXd v = gen.ball(m.exogenous_dim(), 0.3);
      EXPECT_LT(max_abs(m.gx(x, v) - fd_gx(m, x, v)), 1e-5) << m.name();
      EXPECT_LT(max_abs(m.gf(x, v) - fd_gf(m, x, v)), 1e-5) << m.name();
    }
  }
}

TEST(GBlocks, SphereMatchesTableFormula) {
  Gen gen(40);
  const double r = 2.0;
  const Manifold s2 = Manifold::sphere2(r);
  for (int i = 0; i < 50; ++i) {
    const ManifoldPoint x = gen.point(s2);
    const Eigen::Vector3d v = gen.ball(3, 0.3);
    const Eigen::Vector3d xv = x.vec3();
    const Eigen::Matrix3d E = so3_exp(v);
    const Eigen::Matrix<double, 3, 2> Bn = s2_basis(s2.oplus(x, v).vec3());
    const Eigen::Matrix2d gx = -(1.0 / (r * r)) * Bn.transpose() * E * skew(xv) * skew(xv) * s2_basis(xv);
    const Eigen::Matrix<double, 2, 3> gf =
        -(1.0 / (r * r)) * Bn.transpose() * E * skew(xv) * skew(xv) * a_matrix(v).transpose();
    EXPECT_LT(max_abs(s2.gx(x, v) - gx), 1e-13);
    EXPECT_LT(max_abs(s2.gf(x, v) - gf), 1e-13);
  }
}

TEST(Product, ActsBlockwise) {
  Gen gen(41);
  const Manifold hill = Manifold::surface(kBowl);
  const Manifold m = Manifold::product({Manifold::sphere2(1.5), hill, Manifold::rot3(), Manifold::rot2()});
  EXPECT_EQ(m.tangent_dim(), 2 + 2 + 3 + 1);
  EXPECT_EQ(m.exogenous_dim(), 3 + 2 + 3 + 1);
  for (int i = 0; i < 100; ++i) {
    const ManifoldPoint x = gen.point(m);
    const Eigen::VectorXd d = gen.ball(m.tangent_dim(), 0.5);
    const Eigen::VectorXd v = gen.ball(m.exogenous_dim(), 0.3);
    const ManifoldPoint y = m.boxplus(x, d);
    const ManifoldPoint z = m.oplus(x, v);
    const Eigen::MatrixXd Gx = m.gx(x, v);
    const Eigen::MatrixXd Gf = m.gf(x, v);
    for (std::size_t c = 0; c < m.components().size(); ++c) {
      const Manifold& mc = m.components()[c];
      const int to = m.tangent_offset(c), eo = m.exogenous_offset(c);
      const int n = mc.tangent_dim(), l = mc.exogenous_dim();
      const ManifoldPoint xc = x.component(c);
      EXPECT_EQ(y.component(c).coords(), mc.boxplus(xc, d.segment(to, n)).coords());
      EXPECT_EQ(z.component(c).coords(), mc.oplus(xc, v.segment(eo, l)).coords());
      EXPECT_EQ(Eigen::MatrixXd(Gx.block(to, to, n, n)), mc.gx(xc, v.segment(eo, l)));
      EXPECT_EQ(Eigen::MatrixXd(Gf.block(to, eo, n, l)), mc.gf(xc, v.segment(eo, l)));
    }
    // Off-diagonal blocks are exactly zero.
    Eigen::MatrixXd Gx_off = Gx, Gf_off = Gf;
    for (std::size_t c = 0; c < m.components().size(); ++c) {
      const Manifold& mc = m.components()[c];
      Gx_off.block(m.tangent_offset(c), m.tangent_offset(c), mc.tangent_dim(), mc.tangent_dim()).setZero();
      Gf_off.block(m.tangent_offset(c), m.exogenous_offset(c), mc.tangent_dim(), mc.exogenous_dim()).setZero();
    }
    EXPECT_EQ(max_abs(Gx_off), 0.0);
    EXPECT_EQ(max_abs(Gf_off), 0.0);
  }
}

TEST(Points, MembershipIsValidated) {
  EXPECT_THROW(Manifold::rot3().point(Eigen::VectorXd::Ones(9)), ContractViolation);
  EXPECT_THROW(Manifold::sphere2(1.0).point(Eigen::Vector3d(0, 0, 1.1)), ContractViolation);
  EXPECT_THROW(Manifold::surface(kBowl).point(Eigen::Vector3d(1, 1, 0)), ContractViolation);
  EXPECT_THROW(Manifold::euclidean(2).point(Eigen::Vector3d(1, 1, 0)), ContractViolation);
  EXPECT_THROW(Manifold::sphere2(-1.0), ContractViolation);
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1;
  EXPECT_FALSE(Manifold::rot3().contains(Eigen::Map<Eigen::VectorXd>(reflection.data(), 9)));
  EXPECT_TRUE(Manifold::surface(kBowl).contains(Eigen::Vector3d(1, 2, 5)));
}

TEST(Points, EqualityComparesStructure) {
  EXPECT_TRUE(Manifold::rot3() == Manifold::rot3());
  EXPECT_FALSE(Manifold::rot3() == Manifold::rot2());
  EXPECT_FALSE(Manifold::sphere2(1.0) == Manifold::sphere2(2.0));
  EXPECT_TRUE(Manifold::surface(kBowl) == Manifold::surface(kBowl));
  EXPECT_FALSE(Manifold::surface(kBowl) == Manifold::surface(SurfaceModel::flat()));
  EXPECT_TRUE(Manifold::product({Manifold::rot2(), Manifold::euclidean(2)}) ==
              Manifold::product({Manifold::rot2(), Manifold::euclidean(2)}));
}
