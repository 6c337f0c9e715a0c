#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "builtins.hpp"
#include "graph.hpp"
#include "volume.hpp"

using namespace cn2;

namespace {

DetectOptions at_h(double h, int threads = 1) {
  DetectOptions o;
  o.grid.h = h;
  o.grid.threads = threads;
  return o;
}

const DetectResult& ex1_16() {
  static const DetectResult r = detect_graph(make_ex1(), at_h(1.0 / 16));
  return r;
}

}  // namespace

TEST(Graph, FlatTorusIsFlatEverywhere) {
  DetectResult r = detect_graph(make_flat(3), at_h(0.25));
  EXPECT_EQ(r.report.verdict, "FlatEverywhere");
  EXPECT_EQ(r.report.nonflat_components, 0);
  EXPECT_TRUE(r.report.nodes.empty());
}

TEST(Graph, RoundSphereIsNotCN2) {
  DetectOptions o = at_h(0.5);
  o.grid.min_cells = 4;
  DetectResult r = detect_graph(make_sphere3(), o);
  EXPECT_EQ(r.report.verdict, "NotCN2");
  EXPECT_GE(r.report.notcn2_cell, 0);
}

TEST(Graph, GridSpacingMustFitTheBlocks) {
  try {
    detect_graph(make_ex1(), at_h(0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  try {
    detect_graph(make_ex1(), at_h(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResolutionTooCoarse);
  }
}

TEST(Graph, Ex1IsAGraphManifoldWithTwoNodesAndTwoEdges) {
  const GraphReport& rep = ex1_16().report;
  EXPECT_EQ(rep.verdict, "GeometricGraphManifold");
  EXPECT_EQ(rep.nonflat_components, 2);
  ASSERT_EQ(rep.nodes.size(), 2u);
  ASSERT_EQ(rep.edges.size(), 2u);
  for (const auto& e : rep.edges) {
    EXPECT_TRUE(e.accepted);
    EXPECT_TRUE(e.closed);
    ASSERT_EQ(e.sides.size(), 2u);
    EXPECT_NE(e.sides[0], e.sides[1]);
  }
  EXPECT_LE(rep.max_cylinder_residual, rep.options.tol_cyl);
  EXPECT_EQ(rep.profile_failures, 0);
  EXPECT_TRUE(rep.dense);
  EXPECT_TRUE(rep.locally_finite);
}

TEST(Graph, NonflatCellsKeepTheirComponent) {
  const DetectResult& r = ex1_16();
  for (std::size_t c = 0; c < r.sample.cells.size(); ++c) {
    if (r.sample.cells[c].flat) continue;
    EXPECT_EQ(r.extension.label[c], CellLabel::Nonflat);
    EXPECT_EQ(r.extension.comp[c], r.components.id[c]);
  }
}

TEST(Graph, NonflatComponentIdsFollowTheFirstCell) {
  const DetectResult& r = ex1_16();
  int next = 0;
  for (std::size_t c = 0; c < r.sample.cells.size(); ++c) {
    int id = r.components.id[c];
    if (id < 0) continue;
    EXPECT_LE(id, next);
    if (id == next) ++next;
  }
  EXPECT_EQ(next, r.components.count);
}

TEST(Graph, ReportsDoNotDependOnThreadCount) {
  DetectResult a = detect_graph(make_ex1(), at_h(1.0 / 8, 1));
  DetectResult b = detect_graph(make_ex1(), at_h(1.0 / 8, 3));
  EXPECT_EQ(a.report.to_json(), b.report.to_json());
  EXPECT_EQ(a.cells_csv(), b.cells_csv());
}

TEST(Graph, CellsCsvHasOneRowPerCell) {
  const DetectResult& r = ex1_16();
  std::string csv = r.cells_csv();
  EXPECT_EQ(csv.rfind("cell,block,x1,x2,x3,scal,mu,label,component\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.sample.cells.size() + 1);
}

TEST(Graph, PlaneAngleIsALineAngle) {
  const GridSample& s = ex1_16().sample;
  Mat a(3, 1), b(3, 1);
  a << 0, 0, 1;
  b << 0, 0, -1;
  EXPECT_NEAR(plane_angle(s, 0, a, b), 0.0, 1e-12);
  b << 0, 1, 0;
  EXPECT_NEAR(plane_angle(s, 0, a, b), M_PI / 2, 1e-12);
}

TEST(Volume, FlatCubeIsEight) {
  VolumeResult v = volume(make_flat(3), VolumeRegion::all(), 0.125);
  EXPECT_NEAR(v.value, 8.0, 1e-10);
  EXPECT_NEAR(v.extrapolated, 8.0, 1e-10);
  EXPECT_LE(v.error, 1e-12);
}

// Oracle: adaptive quadrature of the strip's sqrt(det g) over its box.
TEST(Volume, StripAreaConvergesAtSecondOrder) {
  VolumeResult v = volume(make_strip_cylinder(), VolumeRegion::all(), 1.0 / 64);
  EXPECT_NEAR(v.extrapolated, 2.152547871481177, 1e-6);
  EXPECT_NEAR(v.order, 2.0, 0.25);
  EXPECT_LE(std::abs(v.value - 2.152547871481177), 2 * v.error);
}

TEST(Volume, RegionsPartitionTheTotal) {
  Atlas a = make_ex1();
  VolumeResult all = volume(a, VolumeRegion::all(), 1.0 / 8);
  Vec lo = Vec::Constant(3, -1.0), hi = Vec::Constant(3, 1.0);
  double blocks = volume(a, VolumeRegion::box(0, lo, hi), 1.0 / 8).value +
                  volume(a, VolumeRegion::box(1, lo, hi), 1.0 / 8).value;
  EXPECT_NEAR(blocks, all.value, 1e-10);
  VolumeResult c0 = volume(a, VolumeRegion::of_component(0), 1.0 / 16);
  EXPECT_GT(c0.value, 0.0);
  EXPECT_LT(c0.value, all.value);
  EXPECT_THROW(volume(a, VolumeRegion::of_component(7), 1.0 / 16), Error);
}

TEST(Examples, StripMetricAtTheOrigin) {
  Atlas a = make_strip_cylinder();
  Mat g = a.jet(0, Vec::Zero(2), 0).g;
  EXPECT_NEAR(g(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g(1, 1), std::exp(-1.0), 1e-15);
  EXPECT_EQ(g(0, 1), 0.0);
}

TEST(Examples, Ex1HasTwoBlocksWithOrthogonalNullity) {
  Atlas a = make_ex1();
  ASSERT_EQ(a.blocks.size(), 2u);
  EXPECT_EQ(a.blocks[0].nullity_axis, 2);
  EXPECT_EQ(a.blocks[1].nullity_axis, 2);
  // seen from A across the interface, B's nullity axis is A's y axis
  Vec p(3);
  p << 1.2, 0.1, 0.2;
  Located L = a.locate(0, p);
  ASSERT_EQ(L.block, 1);
  Vec inA = L.A.transpose() * Vec::Unit(3, 2);
  EXPECT_NEAR(std::abs(inA[1]), 1.0, 1e-15);
  const DetectResult& r = ex1_16();
  for (std::size_t c = 0; c < r.sample.cells.size(); ++c) {
    if (r.sample.cells[c].flat) continue;
    Vec x = r.sample.center(static_cast<int>(c));
    EXPECT_LT(std::max(std::abs(x[0]), std::abs(x[1])), 0.75);
    EXPECT_EQ(r.sample.cells[c].mu, 1);
  }
}

TEST(Examples, Ex2HasThreeNonflatClusters) {
  Atlas a = make_ex2();
  EXPECT_EQ(a.blocks.size(), 5u);
  DetectResult r = detect_graph(a, at_h(1.0 / 8));
  EXPECT_EQ(r.components.count, 3);
}

TEST(Examples, Ex3HasTwoComponentsPerLevel) {
  DetectOptions o = at_h(1.0 / 8);
  o.grid.min_cells = 4;
  DetectResult r = detect_graph(make_ex3(3), o);
  EXPECT_EQ(r.components.count, 6);
}
