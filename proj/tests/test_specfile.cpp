#include <gtest/gtest.h>

#include <cmath>

#include "curvature.hpp"
#include "graph.hpp"
#include "specfile.hpp"

using namespace cn2;

#ifndef CN2_TEST_DATA
#define CN2_TEST_DATA "tests/data"
#endif

namespace {

const std::string kData = CN2_TEST_DATA;

int error_line(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const SpecError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(SpecFile, ConeFileReproducesTheBuiltinCurvature) {
  Atlas a = load_spec(kData + "/cone.spec");
  EXPECT_EQ(a.dim, 3);
  EXPECT_EQ(a.label, "cone_file");
  Vec p(3);
  p << 1.0, 1.0, 0.5;
  CurvatureReport r = analyze(a, 0, p, {});
  EXPECT_NEAR(r.scal, 2.0, 1e-9);
  EXPECT_EQ(r.mu, 1);
}

TEST(SpecFile, PeriodicAxisWraps) {
  Atlas a = load_spec(kData + "/cone.spec");
  Vec p(3);
  p << 1.0, 1.0, 0.5 + 2 * M_PI;
  Located l = a.locate(0, p);
  EXPECT_NEAR(l.x[2], 0.5, 1e-12);
}

TEST(SpecFile, BlocksAndGluesBuildAnAtlas) {
  Atlas a = load_spec(kData + "/slabs.spec");
  ASSERT_EQ(a.blocks.size(), 2u);
  Vec p(3);
  p << 1.5, 0.2, 0.3;
  Located l = a.locate(0, p);
  EXPECT_EQ(l.block, 1);
  EXPECT_NEAR(l.x[0], -0.5, 1e-12);
  Vec q(3);
  q << 0.0, 0.0, 0.0;
  EXPECT_EQ(analyze(a, 0, q, {}).mu, 1);
  EXPECT_NEAR(std::abs(analyze(a, 0, q, {}).nullity_basis(2, 0)), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(analyze(a, 1, q, {}).nullity_basis(1, 0)), 1.0, 1e-9);
}

TEST(SpecFile, SlabsDetectAsAGraphManifold) {
  Atlas a = load_spec(kData + "/slabs.spec");
  DetectOptions o;
  o.grid.h = 1.0 / 8;
  DetectResult r = detect_graph(a, o);
  EXPECT_EQ(r.report.nodes.size(), 2u);
  EXPECT_EQ(r.report.verdict, "GeometricGraphManifold") << r.report.to_json();
}

TEST(SpecFile, MirrorEntriesMustAgree) {
  try {
    load_spec(kData + "/bad_mirror.spec");
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_EQ(e.line(), 8);
    EXPECT_EQ(e.code(), ErrorCode::BadParams);
  }
}

TEST(SpecFile, ErrorsNameTheLine) {
  EXPECT_EQ(error_line("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 1 = 1 + * x\n"), 6);
  EXPECT_EQ(error_line("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 1 = 1 + z\n"), 6);
  EXPECT_EQ(error_line("[chart]\ndimension = 7\n"), 2);
  EXPECT_EQ(error_line("[chart]\ndimension = 2\ncoords = x y\nbox = 1 0, 0 1\n"), 4);
  EXPECT_EQ(error_line("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[frobnicate]\n"), 5);
  EXPECT_EQ(error_line("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 3 = 1\n"), 6);
}

TEST(SpecFile, SyntaxErrorReportsTheColumn) {
  try {
    parse_spec("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 1 = 1 + * x\n");
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_EQ(e.code(), ErrorCode::Syntax);
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
}

TEST(SpecFile, MissingFileIsAnIoError) {
  try {
    load_spec(kData + "/does_not_exist.spec");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(SpecFile, NonPositiveMetricIsRejectedAtUse) {
  Atlas a = parse_spec("[chart]\ndimension = 2\ncoords = x y\nbox = -1 1, -1 1\n[metric]\ng 1 1 = x\n");
  Vec p(2);
  p << -0.5, 0.0;
  try {
    analyze(a, 0, p, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}
