#include <gtest/gtest.h>

#include <string>

#include "cn2/cn2.h"

namespace {

struct Str {
  char* s = nullptr;
  ~Str() { cn2_string_free(s); }
  std::string str() const { return s ? s : ""; }
  bool has(const std::string& needle) const { return str().find(needle) != std::string::npos; }
};

struct Handle {
  cn2_atlas* a = nullptr;
  ~Handle() { cn2_atlas_free(a); }
};

}  // namespace

TEST(CApi, BuiltinHandleReportsShape) {
  Handle h;
  ASSERT_EQ(cn2_atlas_builtin("ex1", nullptr, &h.a), CN2_OK);
  EXPECT_EQ(cn2_atlas_dim(h.a), 3);
  EXPECT_EQ(cn2_atlas_block_count(h.a), 2);
  EXPECT_STREQ(cn2_atlas_label(h.a), "ex1");
}

TEST(CApi, UnknownBuiltinIsBadParams) {
  Handle h;
  EXPECT_EQ(cn2_atlas_builtin("klein_bottle", nullptr, &h.a), CN2_ERR_BAD_PARAMS);
  EXPECT_EQ(h.a, nullptr);
  EXPECT_NE(std::string(cn2_last_error()).find("klein_bottle"), std::string::npos) << cn2_last_error();
  EXPECT_STREQ(cn2_status_name(CN2_ERR_BAD_PARAMS), "BadParams");
  EXPECT_EQ(cn2_atlas_builtin("cone", "c=-1", &h.a), CN2_ERR_BAD_PARAMS);
}

TEST(CApi, SpecTextParses) {
  Handle h;
  const char* text = "[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 1 = 1 + x^2\n";
  ASSERT_EQ(cn2_atlas_parse(text, &h.a), CN2_OK);
  Handle bad;
  EXPECT_EQ(cn2_atlas_parse("[chart]\ndimension = 2\ncoords = x y\nbox = 0 1, 0 1\n[metric]\ng 1 1 = (x\n", &bad.a),
            CN2_ERR_SYNTAX);
  EXPECT_NE(std::string(cn2_last_error()).find("line 6"), std::string::npos);
  Handle missing;
  EXPECT_EQ(cn2_atlas_load("/nonexistent/file.spec", &missing.a), CN2_ERR_IO);
}

TEST(CApi, AnalyzeFlatAndNotCN2) {
  Handle flat, s3;
  ASSERT_EQ(cn2_atlas_builtin("flat3", nullptr, &flat.a), CN2_OK);
  ASSERT_EQ(cn2_atlas_builtin("sphere3", nullptr, &s3.a), CN2_OK);
  double p[3] = {0, 0, 0};
  Str out;
  cn2_point_class cls = CN2_NOT_CN2;
  ASSERT_EQ(cn2_analyze(flat.a, 0, p, nullptr, &out.s, &cls), CN2_OK);
  EXPECT_EQ(cls, CN2_FLAT);
  EXPECT_TRUE(out.has("\"mu\": 3"));
  double q[3] = {1.0, 1.2, 0.4};
  Str out2;
  ASSERT_EQ(cn2_classify(s3.a, 0, q, nullptr, &out2.s, &cls), CN2_OK);
  EXPECT_EQ(cls, CN2_NOT_CN2);
  EXPECT_TRUE(out2.has("NotCN2"));
  Str out3;
  EXPECT_EQ(cn2_analyze(flat.a, 5, p, nullptr, &out3.s, nullptr), CN2_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(out3.s, nullptr);
}

TEST(CApi, RiccatiNilpotentIsStationary) {
  double c0[4] = {0, 1, 0, 0}, t[1] = {5};
  Str out;
  ASSERT_EQ(cn2_riccati(c0, t, 1, 1e-9, &out.s), CN2_OK);
  EXPECT_TRUE(out.has("\"class\": \"nilpotent\""));
  EXPECT_EQ(cn2_riccati(c0, t, 1, -1.0, &out.s), CN2_ERR_INVALID_ARGUMENT);
}

TEST(CApi, GeodesicAndTransport) {
  Handle h;
  ASSERT_EQ(cn2_atlas_builtin("sphere2", nullptr, &h.a), CN2_OK);
  double p[2] = {1.5707963267948966, 0.0}, v[2] = {0.0, 1.0}, w[2] = {1.0, 0.0};
  Str csv, js;
  int complete = 0;
  ASSERT_EQ(cn2_geodesic(h.a, 0, p, v, 2.0, nullptr, &csv.s, &complete), CN2_OK);
  EXPECT_EQ(complete, 1);
  EXPECT_EQ(csv.str().rfind("t,", 0), 0u);
  ASSERT_EQ(cn2_transport(h.a, 0, p, v, 2.0, w, 1, nullptr, &js.s), CN2_OK);
  EXPECT_TRUE(js.has("transported"));
  cn2_flow_options fo;
  cn2_flow_options_default(&fo);
  fo.rtol = 0;
  EXPECT_EQ(cn2_geodesic(h.a, 0, p, v, 2.0, &fo, &csv.s, &complete), CN2_ERR_INVALID_ARGUMENT);
}

TEST(CApi, HolonomyAndSplitting) {
  Handle cone;
  ASSERT_EQ(cn2_atlas_builtin("cone", nullptr, &cone.a), CN2_OK);
  double base[3] = {1.0, 1.2, 0.7}, xi[3] = {0, 1, 0};
  Str hj;
  int ok = 0;
  ASSERT_EQ(cn2_holonomy(cone.a, 0, base, 1, 2, 1.0, 1.4, 0.5, 0.9, xi, nullptr, &hj.s, &ok), CN2_OK);
  EXPECT_EQ(ok, 1);
  EXPECT_TRUE(hj.has("\"satisfied\": true"));
  cn2_splitting_options so;
  cn2_splitting_options_default(&so);
  so.t_max = 1.0;
  so.samples = 3;
  double hint[3] = {1, 0, 0};
  Str sj;
  ASSERT_EQ(cn2_splitting(cone.a, 0, base, hint, &so, &sj.s), CN2_OK) << cn2_last_error();
  EXPECT_TRUE(sj.has("divergence"));
  EXPECT_TRUE(sj.has("field"));
  Handle flat;
  ASSERT_EQ(cn2_atlas_builtin("flat3", nullptr, &flat.a), CN2_OK);
  Str fj;
  EXPECT_EQ(cn2_splitting(flat.a, 0, base, hint, nullptr, &fj.s), CN2_ERR_NOT_CN2_POINT);
}

TEST(CApi, DetectGraphOnEx1) {
  Handle h;
  ASSERT_EQ(cn2_atlas_builtin("ex1", nullptr, &h.a), CN2_OK);
  cn2_detect_options o;
  cn2_detect_options_default(&o);
  o.h = 1.0 / 16;
  Str rep, cells;
  int notcn2 = 1;
  ASSERT_EQ(cn2_detect_graph(h.a, &o, &rep.s, &cells.s, &notcn2), CN2_OK);
  EXPECT_EQ(notcn2, 0);
  EXPECT_TRUE(rep.has("\"verdict\": \"GeometricGraphManifold\""));
  EXPECT_EQ(cells.str().rfind("cell,block,x1,x2,x3,scal,mu,label,component", 0), 0u);
  o.kappa = 0;
  Str bad;
  EXPECT_EQ(cn2_detect_graph(h.a, &o, &bad.s, nullptr, nullptr), CN2_ERR_INVALID_ARGUMENT);
}

TEST(CApi, VolumeRegions) {
  Handle h;
  ASSERT_EQ(cn2_atlas_builtin("flat3", nullptr, &h.a), CN2_OK);
  Str all, box;
  ASSERT_EQ(cn2_volume(h.a, nullptr, 0.25, nullptr, &all.s), CN2_OK);
  EXPECT_TRUE(all.has("\"value\": 8.0"));
  double lo[3] = {0, 0, 0}, hi[3] = {1, 1, 1};
  cn2_region r{CN2_REGION_BOX, 0, 0, lo, hi};
  ASSERT_EQ(cn2_volume(h.a, &r, 0.25, nullptr, &box.s), CN2_OK);
  EXPECT_TRUE(box.has("\"value\": 1.0"));
}

TEST(CApi, ListsAndVerify) {
  Str b, s, v;
  ASSERT_EQ(cn2_builtin_list(&b.s), CN2_OK);
  EXPECT_TRUE(b.has("sphere_product"));
  ASSERT_EQ(cn2_suite_list(&s.s), CN2_OK);
  EXPECT_TRUE(s.has("riccati"));
  int passed = 0, failed = -1;
  ASSERT_EQ(cn2_verify("riccati", 42, 1, &v.s, &passed, &failed), CN2_OK);
  EXPECT_GT(passed, 0);
  EXPECT_EQ(failed, 0);
  Str u;
  EXPECT_EQ(cn2_verify("nope", 42, 1, &u.s, nullptr, nullptr), CN2_ERR_INVALID_ARGUMENT);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(cn2_atlas_builtin(nullptr, nullptr, nullptr), CN2_ERR_INVALID_ARGUMENT);
  Str s;
  EXPECT_EQ(cn2_analyze(nullptr, 0, nullptr, nullptr, &s.s, nullptr), CN2_ERR_INVALID_ARGUMENT);
  cn2_atlas_free(nullptr);
  cn2_string_free(nullptr);
}
