#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "builtins.hpp"
#include "flows.hpp"
#include "report.hpp"
#include "splitting.hpp"

using namespace cn2;

namespace {

Vec v3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
}

Mat2 m2(double a, double b, double c, double d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(Geodesic, EquatorOfTheSphereIsAGreatCircle) {
  Atlas s2 = make_sphere2();
  Vec p(2), v(2);
  p << std::numbers::pi / 2, 0.5;
  v << 0.0, 1.0;
  GeodesicPath path = integrate_geodesic(s2, 0, p, v, 3.0);
  ASSERT_TRUE(path.complete);
  Vec x, xd;
  path.at(3.0, x, xd);
  EXPECT_NEAR(x[0], std::numbers::pi / 2, 1e-9);
  EXPECT_NEAR(x[1], 3.5, 1e-8);
}

TEST(Geodesic, SpeedIsPreserved) {
  Atlas a = make_ex1();
  Vec p = v3(0.1, 0.2, 0.0), v = v3(0.6, -0.3, 0.5);
  GeodesicPath path = integrate_geodesic(a, 0, p, v, 3.0);
  double s0 = v.dot(a.jet(0, p, 0).g * v);
  for (const auto& s : path.samples) {
    double s1 = s.v.dot(a.jet(s.block, s.x, 0).g * s.v);
    EXPECT_NEAR(s1, s0, 1e-8);
  }
  EXPECT_NE(path.to_csv().find("t,"), std::string::npos);
}

TEST(Transport, PreservesInnerProducts) {
  Atlas a = make_ex1();
  Vec p = v3(0.1, -0.3, 0.2), v = v3(0.5, 0.4, 0.1);
  Mat W(3, 2);
  W << 1, 0, 0, 1, 0, 0.5;
  TransportResult r = transport_geodesic(a, 0, p, v, 1.5, W);
  Mat G0 = W.transpose() * a.jet(0, p, 0).g * W;
  const PathSample& end = r.path.samples.back();
  Mat G1 = r.transported.transpose() * a.jet(end.block, end.x, 0).g * r.transported;
  EXPECT_LE((G1 - G0).norm(), 1e-8);
}

TEST(Transport, PrincipalAnglesOfCoordinatePlanes) {
  Mat g = Mat::Identity(3, 3), A(3, 1), B(3, 1);
  A << 1, 0, 0;
  B << 1, 1, 0;
  auto ang = principal_angles(g, A, B);
  ASSERT_EQ(ang.size(), 1u);
  EXPECT_NEAR(ang[0], std::numbers::pi / 4, 1e-14);
  Mat C(3, 2);
  C << 1, 0, 0, 1, 0, 0;
  EXPECT_THROW(principal_angles(g, A, C), Error);
}

TEST(Holonomy, SphericalCapMatchesGaussBonnet) {
  Atlas s2 = make_sphere2();
  Vec base(2), xi(2);
  base << 0.5, 0.0;
  xi << 1, 0;
  HolonomyReport h = holonomy_bound_check(s2, 0, base, 0, 1, 1e-4, 0.8, 0, 2 * std::numbers::pi, xi);
  EXPECT_NEAR(h.area, 2 * std::numbers::pi * (std::cos(1e-4) - std::cos(0.8)), 1e-9);
  EXPECT_NEAR(h.angle, h.area, 1e-6);
  EXPECT_TRUE(h.satisfied);
}

TEST(Holonomy, FlatLoopsHaveNoHolonomy) {
  Atlas a = make_flat(3);
  HolonomyReport h = holonomy_bound_check(a, 0, v3(1, 1, 1), 0, 2, 0.2, 1.5, 0.3, 1.7, v3(0, 1, 1));
  EXPECT_LE(h.angle, 1e-10);
  EXPECT_TRUE(h.satisfied);
}

TEST(Riccati, ClosedFormSolvesTheEquation) {
  Mat2 C0 = m2(0.3, -0.7, 0.2, 0.5);
  const double t = 0.35, e = 1e-5;
  Mat2 d = (riccati_closed_form(C0, t + e) - riccati_closed_form(C0, t - e)) / (2 * e);
  Mat2 C = riccati_closed_form(C0, t);
  EXPECT_LE((d - C * C).norm(), 1e-8);
  auto [tr, det] = trace_det_evolution(C0, t);
  EXPECT_NEAR(tr, C.trace(), 1e-12);
  EXPECT_NEAR(det, C.determinant(), 1e-12);
}

TEST(Riccati, NilpotentDataIsStationary) {
  Mat2 N = m2(0, 1, 0, 0);
  EXPECT_EQ(classify_split(N), SplitClass::Nilpotent);
  EXPECT_LE((riccati_closed_form(N, 5.0) - N).norm(), 1e-12);
  EXPECT_TRUE(singular_times(N).empty());
}

TEST(Riccati, IdentityBlowsUpAtOne) {
  Mat2 I = Mat2::Identity();
  auto ts = singular_times(I);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_DOUBLE_EQ(ts[0], 1.0);
  try {
    riccati_closed_form(I, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Blowup);
  }
  EXPECT_EQ(classify_split(m2(0, -1, 1, 0)), SplitClass::ComplexEigen);
  EXPECT_EQ(classify_split(m2(2, 0, 0, -1)), SplitClass::RealEigen);
  EXPECT_EQ(classify_split(Mat2::Zero()), SplitClass::Zero);
}

TEST(Riccati, JsonCarriesErrorsPastTheSingularTime) {
  Json j = riccati_json(Mat2::Identity(), {0.5, 1.0});
  EXPECT_EQ(j["samples"][0]["C"][0][0].get<double>(), 2.0);
  EXPECT_TRUE(j["samples"][1].contains("error"));
}

// Along the radial nullity geodesic of the cone, C = -I/(r0 + t).
TEST(Splitting, ConeSplittingTensorIsIsotropic) {
  Atlas cone = make_cone(std::sqrt(0.5));
  SplittingOptions opt;
  Vec p = v3(1.0, 1.2, 0.7), hint = v3(1, 0, 0);
  AdaptedFrame f = adapted_frame(cone, 0, p, hint, opt);
  SplittingTensor st = splitting_tensor(cone, 0, f, opt);
  EXPECT_LE((st.C + Mat2::Identity()).norm(), 1e-6);
  DivergenceReport d = divergence_check(cone, 0, p, hint, opt);
  EXPECT_NEAR(d.trace_C, -2.0, 1e-6);
  EXPECT_LE(d.residual, 1e-5);
  RiccatiFieldReport r = riccati_field_check(cone, 0, p, hint, 1.5, 4, opt);
  EXPECT_LE(r.max_deviation, 1e-5);
}

TEST(Splitting, ProductHasParallelNullity) {
  Atlas sp = make_sphere_product(1.0);
  SplittingOptions opt;
  Vec p = v3(1.0, 0.5, 0.3);
  SplittingTensor st = splitting_tensor(sp, 0, adapted_frame(sp, 0, p, v3(0, 0, 1), opt), opt);
  EXPECT_LE(st.C.norm(), 1e-8);
  EXPECT_EQ(st.cls, SplitClass::Zero);
  EXPECT_THROW(unit_nullity(make_flat(3), 0, p, v3(0, 0, 1), opt), Error);
}

TEST(Jacobi, ConeDeviationGrowsLinearly) {
  Atlas cone = make_cone(std::sqrt(0.5));
  Vec p = v3(1.0, 1.2, 0.7), T = v3(1, 0, 0), J = v3(0, 1, 0);
  JacobiReport r = jacobi_check(cone, 0, p, T, J, 1.0);
  double norm = std::sqrt(0.5);  // |d/dtheta| at r = 1
  EXPECT_NEAR(r.max_deviation, norm * 1.0, 1e-4);
  EXPECT_THROW(jacobi_check(cone, 0, p, v3(0, 1, 0), v3(1, 0, 0), 1.0), Error);
}
