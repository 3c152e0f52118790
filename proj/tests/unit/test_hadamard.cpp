#include "afp/hadamard.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace afp;
using afp::testing::random_point;
using afp::testing::random_tangent;
using afp::testing::unit;
using afp::testing::vec;

TEST(MinkInner, Basics) {
  EXPECT_EQ(mink_inner(vec({1, 0, 0, 0}), vec({1, 0, 0, 0})), -1.0);
  EXPECT_EQ(mink_inner(vec({1, 0, 0, 0}), vec({0, 1, 0, 0})), 0.0);
  const double c = std::cosh(1.0), s = std::sinh(1.0);
  EXPECT_NEAR(mink_inner(vec({c, s, 0, 0}), vec({c, s, 0, 0})), -1.0, 1e-14);
  EXPECT_THROW(mink_inner(vec({1, 0, 0}), vec({1, 0, 0, 0})), std::invalid_argument);
}

TEST(ModelSpace, RejectsBadParameters) {
  EXPECT_THROW(ModelSpace(1), std::invalid_argument);
  EXPECT_THROW(ModelSpace(3, 0.5), std::invalid_argument);
  EXPECT_NO_THROW(ModelSpace(3, 2.5));
}

TEST(Geodesic, ClosedForm) {
  const ModelSpace s(3);
  const TangentVector v = s.tangent(s.origin(), vec({0, 1, 0, 0}));
  EXPECT_TRUE(s.geodesic(v, 0.0).x.isApprox(vec({1, 0, 0, 0})));
  const HyperboloidPoint p = s.geodesic(v, 1.0);
  // cosh 1, sinh 1
  EXPECT_NEAR(p.x[0], 1.5430806348152437, 1e-12);
  EXPECT_NEAR(p.x[1], 1.1752011936438014, 1e-12);
  EXPECT_NEAR(p.x[2], 0.0, 1e-15);
}

TEST(Geodesic, RejectsNonUnitSpeedAndCap) {
  const ModelSpace s(3);
  EXPECT_THROW(s.geodesic(s.tangent(s.origin(), vec({0, 2, 0, 0})), 1.0), GeometryError);
  EXPECT_THROW(s.geodesic(s.tangent(s.origin(), vec({0, 1, 0, 0})), 41.0), GeometryError);
}

TEST(Geodesic, UnitSpeedProperty) {
  std::mt19937_64 rng(11);
  for (double kappa : {1.0, 2.5}) {
    const ModelSpace s(4, kappa);
    for (int i = 0; i < 50; ++i) {
      const HyperboloidPoint x = random_point(s, rng, 3.0);
      const TangentVector v = unit(s, random_tangent(s, x, rng));
      const HyperboloidPoint y = s.geodesic(v, 2.0);
      EXPECT_NEAR(s.distance(x, y), 2.0, 1e-10);
      EXPECT_TRUE(s.on_hyperboloid(y, 1e-10));
    }
  }
}

TEST(LogMap, InverseOfGeodesic) {
  std::mt19937_64 rng(12);
  const ModelSpace s(3);
  for (int i = 0; i < 50; ++i) {
    const HyperboloidPoint x = random_point(s, rng, 2.0);
    const TangentVector v = unit(s, random_tangent(s, x, rng));
    const double t = afp::testing::uniform(rng, 0.01, 20.0);
    const TangentVector l = s.log(x, s.geodesic(v, t));
    EXPECT_NEAR(mink_norm(l.v), t, 1e-9 * std::max(1.0, t));
    EXPECT_LT(mink_norm(l.v / mink_norm(l.v) - v.v), 1e-9);
    const HyperboloidPoint y = random_point(s, rng, 5.0);
    EXPECT_NEAR(mink_norm(s.log(x, y).v), std::acosh(-mink_inner(x.x, y.x)), 1e-9);
  }
  const HyperboloidPoint x = random_point(s, rng, 2.0);
  EXPECT_EQ(s.log(x, x).v.norm(), 0.0);
}

TEST(ParallelTransport, IsometryAndReversal) {
  std::mt19937_64 rng(13);
  const ModelSpace s(4, 1.7);
  for (int i = 0; i < 30; ++i) {
    const HyperboloidPoint x = random_point(s, rng, 2.0);
    const TangentVector along = unit(s, random_tangent(s, x, rng));
    const TangentVector a = random_tangent(s, x, rng), b = random_tangent(s, x, rng);
    const double t = afp::testing::uniform(rng, -3.0, 3.0);
    const TangentVector ta = s.parallel_transport(a, along, t), tb = s.parallel_transport(b, along, t);
    EXPECT_NEAR(mink_inner(ta.v, tb.v), mink_inner(a.v, b.v), 1e-10 * (1 + a.v.squaredNorm() + b.v.squaredNorm()));
    EXPECT_NEAR(mink_inner(ta.base.x, ta.v), 0.0, 1e-10 * ta.v.norm() * ta.base.x.norm());

    // back along the reversed velocity
    const TangentVector vel = s.parallel_transport(along, along, t);
    const TangentVector back = s.parallel_transport(ta, {vel.base, -vel.v}, t);
    EXPECT_LT((back.v - a.v).norm(), 1e-9 * (1 + a.v.norm()) * std::cosh(std::abs(t)) * 4);

    // auto-parallel: the transported velocity is the geodesic velocity
    const double h = 1e-6;
    const Vec fd = (s.geodesic(along, t + h).x - s.geodesic(along, t - h).x) / (2 * h);
    EXPECT_LT((vel.v - fd).norm(), 1e-6 * (1 + fd.norm()));
  }
  const HyperboloidPoint x = random_point(s, rng, 1.0);
  const TangentVector v = random_tangent(s, x, rng);
  EXPECT_EQ(s.parallel_transport(v, unit(s, random_tangent(s, x, rng)), 0.0).v, v.v);
}

TEST(Curvature, ConstantSectional) {
  std::mt19937_64 rng(14);
  for (double kappa : {1.0, 2.5}) {
    const ModelSpace s(3, kappa);
    const TangentVector u = s.tangent(s.origin(), vec({0, 1, 0, 0}));
    const TangentVector v = s.tangent(s.origin(), vec({0, 0, 1, 0}));
    EXPECT_NEAR(mink_inner(s.curvature_apply(u, v, v).v, u.v), -kappa, 1e-12);
    EXPECT_EQ(s.curvature_apply(u, u, v).v.norm(), 0.0);
    for (int i = 0; i < 20; ++i) {
      const HyperboloidPoint x = random_point(s, rng, 2.0);
      EXPECT_NEAR(s.sectional_curvature(random_tangent(s, x, rng), random_tangent(s, x, rng)), -kappa, 1e-10);
    }
  }
}

TEST(Klein, RoundTripAndChords) {
  std::mt19937_64 rng(15);
  const ModelSpace s(3);
  EXPECT_EQ(s.to_klein(s.origin()).norm(), 0.0);
  const HyperboloidPoint p = s.from_klein(vec({0.99, 0, 0}));
  EXPECT_NEAR(s.distance(s.origin(), p), 2.6466524123622458, 1e-8);  // atanh 0.99
  EXPECT_THROW(s.from_klein(vec({1.0, 0, 0})), GeometryError);
  for (int i = 0; i < 20; ++i) {
    const HyperboloidPoint a = random_point(s, rng, 3.0), b = random_point(s, rng, 3.0);
    EXPECT_LT((s.from_klein(s.to_klein(a)).x - a.x).norm(), 1e-10 * a.x.norm());
    const Vec ka = s.to_klein(a), kb = s.to_klein(b);
    const TangentVector l = s.log(a, b);
    const double d = mink_norm(l.v);
    const TangentVector u{a, l.v / d};
    double worst = 0.0;
    for (int j = 1; j < 100; ++j) {
      const Vec q = s.to_klein(s.geodesic(u, d * j / 100.0));
      const Vec e = (kb - ka).normalized();
      const Vec off = (q - ka) - (q - ka).dot(e) * e;
      worst = std::max(worst, off.norm());
    }
    EXPECT_LT(worst, 1e-8);
  }
}

TEST(Klein, IdealDirections) {
  const ModelSpace s(3);
  const HyperboloidPoint x = s.toward_ideal({vec({0, 0, 1})}, 2.0);
  EXPECT_NEAR(s.distance(s.origin(), x), 2.0, 1e-12);
  EXPECT_NEAR(s.to_klein(x)[2], std::tanh(2.0), 1e-12);
}

TEST(Lorentz, PreservesDistances) {
  std::mt19937_64 rng(16);
  const ModelSpace s(3);
  const auto m = LorentzTransform::boost(3, 1, 0.7).then(LorentzTransform::rotation(3, 1, 3, 0.4));
  for (int i = 0; i < 20; ++i) {
    const HyperboloidPoint a = random_point(s, rng, 3.0), b = random_point(s, rng, 3.0);
    EXPECT_NEAR(s.distance(m.apply(a), m.apply(b)), s.distance(a, b), 1e-9);
  }
}

TEST(Distance, MetricAxioms) {
  std::mt19937_64 rng(17);
  const ModelSpace s(4, 1.3);
  for (int i = 0; i < 100; ++i) {
    const HyperboloidPoint a = random_point(s, rng, 4), b = random_point(s, rng, 4), c = random_point(s, rng, 4);
    EXPECT_EQ(s.distance(a, b), s.distance(b, a));
    EXPECT_LE(s.distance(a, c), s.distance(a, b) + s.distance(b, c) + 1e-12);
  }
}

TEST(DistanceHessian, UnitCurvature) {
  const ModelSpace s(3);
  const HyperboloidPoint x = s.geodesic(s.tangent(s.origin(), vec({0, 1, 0, 0})), 1.0);
  const HessianReport r = distance_hessian_check(s, s.origin(), x, 1.0, 1.0);
  EXPECT_NEAR(r.f, 1.0, 1e-12);
  ASSERT_EQ(r.eigenvalues.size(), 2u);
  for (double e : r.eigenvalues) EXPECT_NEAR(e, 1.3130352854993313, 1e-3);  // coth 1
  EXPECT_NEAR(r.radial_eigenvalue, 0.0, 1e-4);
  EXPECT_TRUE(r.within_lower);
  EXPECT_TRUE(r.within_upper);
}

TEST(DistanceHessian, RescaledWindow) {
  const ModelSpace s(3, 4.0);
  const HyperboloidPoint x = s.geodesic(s.tangent(s.origin(), vec({0, 0, 1, 0})), 1.0);
  const HessianReport r = distance_hessian_check(s, s.origin(), x, 1.0, 2.0);
  for (double e : r.eigenvalues) {
    EXPECT_NEAR(e, 2.0746294414550962, 1e-3);  // 2 coth 2
    EXPECT_GE(e, 1.3130352854993313 - 1e-4);
  }
  EXPECT_TRUE(r.within_lower && r.within_upper);
}

TEST(DistanceHessian, Refusals) {
  const ModelSpace s(3);
  const HyperboloidPoint near = s.geodesic(s.tangent(s.origin(), vec({0, 1, 0, 0})), 0.01);
  EXPECT_THROW(distance_hessian_check(s, s.origin(), near, 1, 1), GeometryError);
  EXPECT_THROW(distance_hessian_check(s, s.origin(), near, 2, 1), std::invalid_argument);
  EXPECT_THROW(distance_hessian_check(ModelSpace(3, 4), ModelSpace(3, 4).origin(), ModelSpace(3, 4).origin(), 1, 1),
               std::invalid_argument);
}
