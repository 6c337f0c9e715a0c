#include <gtest/gtest.h>

#include <cmath>

#include "builtins.hpp"
#include "curvature.hpp"

using namespace cn2;

namespace {

Vec pt(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

CurvatureReport at(const std::string& name, const Vec& p, const std::string& params = "") {
  return analyze(make_builtin(name, parse_params(params)), 0, p, {});
}

}  // namespace

TEST(Curvature, FlatTorusHasZeroTensor) {
  CurvatureReport r = at("flat3", pt({0.3, 1.2, 1.9}));
  EXPECT_LE(r.norm, 1e-12);
  EXPECT_EQ(r.mu, 3);
  EXPECT_EQ(r.classify({}), PointClass::Flat);
}

TEST(Curvature, UnitSphereProductScalarCurvature) {
  CurvatureReport r = at("sphere_product", pt({1.1, 0.4, 0.2}));
  EXPECT_NEAR(r.scal, 2.0, 1e-8);
  EXPECT_EQ(r.mu, 1);
  EXPECT_NEAR(std::abs(r.nullity_basis(2, 0)), 1.0, 1e-12);
  EXPECT_EQ(r.classify({}), PointClass::NonflatCN2);
}

// Warped product dr^2 + c^2 r^2 g_S2: Scal = 2 (1 - c^2) / (c^2 r^2), which is 2 at c^2 = 1/2, r = 1.
TEST(Curvature, ConeMatchesWarpedProductFormula) {
  CurvatureReport r = at("cone", pt({1.0, 1.0, 0.5}));
  EXPECT_NEAR(r.scal, 2.0, 1e-6);
  CurvatureReport s = at("cone", pt({2.5, 0.7, 2.0}), "c=0.6");
  EXPECT_NEAR(s.scal, 2 * (1 - 0.36) / (0.36 * 2.5 * 2.5), 1e-9);
  EXPECT_EQ(s.mu, 1);
  EXPECT_NEAR(std::abs(s.nullity_basis(0, 0)), 1.0, 1e-9);
}

TEST(Curvature, CoordinateOneConeIsFlat) {
  EXPECT_LE(at("cone", pt({1.5, 1.0, 0.5}), "c=1").norm, 1e-12);
}

TEST(Curvature, SphereChristoffelSymbols) {
  CurvatureReport r = at("sphere2", pt({M_PI / 4, 0.3}));
  EXPECT_NEAR(r.christoffel(0, 1, 1), -0.5, 1e-14);
  EXPECT_NEAR(r.christoffel(1, 0, 1), 1.0, 1e-14);
  EXPECT_NEAR(r.christoffel(1, 1, 0), 1.0, 1e-14);
  EXPECT_NEAR(r.scal, 2.0, 1e-12);
}

TEST(Curvature, RoundThreeSphereIsNotCN2) {
  CurvatureReport r = at("sphere3", pt({1.0, 1.2, 0.4}));
  EXPECT_EQ(r.mu, 0);
  EXPECT_EQ(r.classify({}), PointClass::NotCN2);
  EXPECT_NEAR(r.scal, 6.0, 1e-10);
}

TEST(Curvature, TensorSymmetriesAndBianchi) {
  Atlas a = make_ex1();
  CurvatureReport r = analyze(a, 0, pt({0.1, -0.2, 0.3}), {});
  const int n = r.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          worst = std::max(worst, std::abs(r.R(i, j, k, l) + r.R(j, i, k, l)));
          worst = std::max(worst, std::abs(r.R(i, j, k, l) - r.R(k, l, i, j)));
          worst = std::max(worst, std::abs(r.R(i, j, k, l) + r.R(j, k, i, l) + r.R(k, i, j, l)));
        }
  EXPECT_LE(worst, 1e-12);
  EXPECT_EQ(r.mu, 1);
}

TEST(Curvature, FiniteDifferencesAgreeWithAutomaticDerivatives) {
  Atlas a = make_ex1();
  Vec p = pt({0.2, 0.1, -0.4});
  CurvatureReport ad = analyze(a, 0, p, {});
  a.fd = true;
  CurvatureReport fd = analyze(a, 0, p, {});
  EXPECT_NEAR(fd.scal, ad.scal, 1e-5 * std::max(1.0, std::abs(ad.scal)));
  EXPECT_EQ(fd.mu, ad.mu);
}

TEST(Curvature, ScalingByLambdaDividesScalarCurvatureByLambdaSquared) {
  CurvatureReport a = at("sphere_product", pt({1.1, 0.4, 0.2}));
  CurvatureReport b = at("sphere_product", pt({1.1, 0.4, 0.2}), "scale=2");
  EXPECT_NEAR(b.scal, a.scal / 4, 1e-10);
  EXPECT_EQ(b.mu, a.mu);
}

TEST(Curvature, RicciTraceIsScalar) {
  CurvatureReport r = at("hypersurface_graph", pt({0.3, -0.2, 0.5}));
  Mat ginv = r.g.inverse();
  double tr = 0.0;
  for (int i = 0; i < r.n; ++i)
    for (int j = 0; j < r.n; ++j) tr += ginv(i, j) * r.ricci(i, j);
  EXPECT_NEAR(tr, r.scal, 1e-12);
}

TEST(Curvature, OutsideTheChartIsAnError) {
  Atlas a = make_builtin("cone", {});
  try {
    analyze(a, 0, pt({10.0, 1.0, 1.0}), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
  }
  EXPECT_THROW(analyze(a, 0, pt({1.0, 1.0}), {}), Error);
}
