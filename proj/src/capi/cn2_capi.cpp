#include "cn2/cn2.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <thread>

#include "builtins.hpp"
#include "report.hpp"
#include "specfile.hpp"
#include "verify.hpp"
#include "volume.hpp"

struct cn2_atlas {
  cn2::Atlas atlas;
};

namespace {

thread_local std::string last_error;

char* copy_out(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

template <class F>
cn2_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return CN2_OK;
  } catch (const cn2::Error& e) {
    last_error = e.what();
    return static_cast<cn2_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return CN2_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw cn2::Error(cn2::ErrorCode::InvalidArgument, what);
}

const cn2::Atlas& atlas_of(const cn2_atlas* a) {
  require(a != nullptr, "null atlas");
  return a->atlas;
}

void check_block(const cn2::Atlas& at, int block) {
  if (block < 0 || block >= static_cast<int>(at.blocks.size()))
    throw cn2::Error(cn2::ErrorCode::InvalidArgument, "block index " + std::to_string(block) + " out of range");
}

cn2::Vec vec_of(const double* p, int n, const char* what) {
  require(p != nullptr, what);
  return Eigen::Map<const cn2::Vec>(p, n);
}

cn2::CurvatureOptions curvature_options(const cn2_curvature_options* o) {
  cn2::CurvatureOptions c;
  if (o) {
    c.tau_rank = o->tau_rank;
    c.tau_flat = o->tau_flat;
  }
  require(c.tau_rank > 0 && c.tau_flat > 0, "tolerances must be positive");
  return c;
}

cn2::FlowOptions flow_options(const cn2_flow_options* o) {
  cn2::FlowOptions f;
  if (o) {
    f.rtol = o->rtol;
    f.atol = o->atol;
    f.h_max = o->h_max;
  }
  require(f.rtol > 0 && f.atol > 0 && f.h_max >= 0, "tolerances must be positive");
  return f;
}

int resolve_threads(int t) {
  if (t > 0) return t;
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

cn2::DetectOptions detect_options(const cn2_detect_options* o) {
  cn2::DetectOptions d;
  if (!o) return d;
  require(o->h > 0 && o->kappa > 0 && o->m_cap > 0 && o->rho >= 0 && o->tol_par >= 0 && o->tol_bnl >= 0 &&
              o->tol_cyl > 0 && o->tau_rank > 0 && o->tau_flat > 0 && o->min_cells >= 0,
          "detection options must be positive");
  d.grid.h = o->h;
  d.grid.min_cells = o->min_cells;
  d.grid.curvature.tau_rank = o->tau_rank;
  d.grid.curvature.tau_flat = o->tau_flat;
  d.grid.threads = resolve_threads(o->threads);
  d.kappa = o->kappa;
  d.m_cap = o->m_cap;
  d.rho = o->rho;
  d.tol_par = o->tol_par;
  d.tol_bnl = o->tol_bnl;
  d.tol_cyl = o->tol_cyl;
  return d;
}

cn2_point_class class_of(cn2::PointClass c) {
  switch (c) {
    case cn2::PointClass::Flat: return CN2_FLAT;
    case cn2::PointClass::NonflatCN2: return CN2_NONFLAT_CN2;
    case cn2::PointClass::NotCN2: return CN2_NOT_CN2;
  }
  return CN2_NOT_CN2;
}

}  // namespace

extern "C" {

const char* cn2_version(void) { return "1.0.0"; }

const char* cn2_status_name(cn2_status status) {
  if (status == CN2_OK) return "Ok";
  if (status == CN2_ERR_INTERNAL) return "Internal";
  if (status >= CN2_ERR_SYNTAX && status <= CN2_ERR_INVALID_ARGUMENT)
    return cn2::error_code_name(static_cast<cn2::ErrorCode>(static_cast<int>(status)));
  return "Unknown";
}

const char* cn2_last_error(void) { return last_error.c_str(); }

void cn2_string_free(char* s) { std::free(s); }

cn2_status cn2_atlas_builtin(const char* name, const char* params, cn2_atlas** out) {
  return guarded([&] {
    require(name && out, "null argument");
    auto a = std::make_unique<cn2_atlas>();
    a->atlas = cn2::make_builtin(name, params ? cn2::parse_params(params) : cn2::ParamMap{});
    *out = a.release();
  });
}

cn2_status cn2_atlas_load(const char* path, cn2_atlas** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto a = std::make_unique<cn2_atlas>();
    a->atlas = cn2::load_spec(path);
    *out = a.release();
  });
}

cn2_status cn2_atlas_parse(const char* text, cn2_atlas** out) {
  return guarded([&] {
    require(text && out, "null argument");
    auto a = std::make_unique<cn2_atlas>();
    a->atlas = cn2::parse_spec(text);
    *out = a.release();
  });
}

void cn2_atlas_free(cn2_atlas* atlas) { delete atlas; }

int cn2_atlas_dim(const cn2_atlas* atlas) { return atlas ? atlas->atlas.dim : 0; }

int cn2_atlas_block_count(const cn2_atlas* atlas) {
  return atlas ? static_cast<int>(atlas->atlas.blocks.size()) : 0;
}

const char* cn2_atlas_label(const cn2_atlas* atlas) { return atlas ? atlas->atlas.label.c_str() : ""; }

void cn2_atlas_set_fd(cn2_atlas* atlas, int fd) {
  if (atlas) atlas->atlas.fd = fd != 0;
}

cn2_status cn2_builtin_list(char** json) {
  return guarded([&] {
    require(json, "null argument");
    cn2::Json j = cn2::Json::array();
    for (const auto& b : cn2::builtin_list())
      j.push_back({{"name", b.name}, {"params", b.params}, {"summary", b.summary}});
    *json = copy_out(cn2::dump(j));
  });
}

void cn2_curvature_options_default(cn2_curvature_options* opt) {
  if (!opt) return;
  cn2::CurvatureOptions c;
  opt->tau_rank = c.tau_rank;
  opt->tau_flat = c.tau_flat;
}

cn2_status cn2_analyze(const cn2_atlas* atlas, int block, const double* point, const cn2_curvature_options* opt,
                       char** json, cn2_point_class* cls) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json, "null argument");
    check_block(at, block);
    cn2::CurvatureOptions c = curvature_options(opt);
    cn2::CurvatureReport r = cn2::analyze(at, block, vec_of(point, at.dim, "null point"), c);
    *json = copy_out(cn2::dump(cn2::curvature_json(r, c)));
    if (cls) *cls = class_of(r.classify(c));
  });
}

cn2_status cn2_classify(const cn2_atlas* atlas, int block, const double* point, const cn2_curvature_options* opt,
                        char** json, cn2_point_class* cls) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json, "null argument");
    check_block(at, block);
    cn2::CurvatureOptions c = curvature_options(opt);
    cn2::CurvatureReport r = cn2::analyze(at, block, vec_of(point, at.dim, "null point"), c);
    cn2::PointClass pc = r.classify(c);
    cn2::Json j;
    j["point"] = cn2::to_json(r.point);
    j["class"] = cn2::point_class_name(pc);
    j["scal"] = r.scal;
    j["norm"] = r.norm;
    j["mu"] = r.mu;
    *json = copy_out(cn2::dump(j));
    if (cls) *cls = class_of(pc);
  });
}

void cn2_flow_options_default(cn2_flow_options* opt) {
  if (!opt) return;
  cn2::FlowOptions f;
  opt->rtol = f.rtol;
  opt->atol = f.atol;
  opt->h_max = f.h_max;
}

cn2_status cn2_geodesic(const cn2_atlas* atlas, int block, const double* p, const double* v, double t_max,
                        const cn2_flow_options* opt, char** csv, int* complete) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(csv, "null argument");
    require(t_max > 0, "t_max must be positive");
    check_block(at, block);
    cn2::GeodesicPath path = cn2::integrate_geodesic(at, block, vec_of(p, at.dim, "null point"),
                                                     vec_of(v, at.dim, "null velocity"), t_max, flow_options(opt));
    *csv = copy_out(path.to_csv());
    if (complete) *complete = path.complete ? 1 : 0;
  });
}

cn2_status cn2_transport(const cn2_atlas* atlas, int block, const double* p, const double* v, double t_max,
                         const double* vectors, int k, const cn2_flow_options* opt, char** json) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json && vectors, "null argument");
    require(k >= 1 && k <= at.dim, "need between 1 and n vectors");
    require(t_max > 0, "t_max must be positive");
    check_block(at, block);
    cn2::Mat W = Eigen::Map<const cn2::Mat>(vectors, at.dim, k);
    cn2::TransportResult r = cn2::transport_geodesic(at, block, vec_of(p, at.dim, "null point"),
                                                     vec_of(v, at.dim, "null velocity"), t_max, W, flow_options(opt));
    *json = copy_out(cn2::dump(cn2::transport_json(r, W)));
  });
}

cn2_status cn2_holonomy(const cn2_atlas* atlas, int block, const double* base, int axis_u, int axis_v, double u0,
                        double u1, double v0, double v1, const double* xi, const cn2_flow_options* opt, char** json,
                        int* satisfied) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json, "null argument");
    check_block(at, block);
    require(axis_u >= 0 && axis_v >= 0 && axis_u < at.dim && axis_v < at.dim && axis_u != axis_v,
            "axes must be two distinct coordinate indices");
    require(u1 > u0 && v1 > v0, "rectangle must have positive extent");
    cn2::HolonomyReport r =
        cn2::holonomy_bound_check(at, block, vec_of(base, at.dim, "null base point"), axis_u, axis_v, u0, u1, v0, v1,
                                  vec_of(xi, at.dim, "null vector"), flow_options(opt));
    *json = copy_out(cn2::dump(cn2::Json::parse(r.to_json())));
    if (satisfied) *satisfied = r.satisfied ? 1 : 0;
  });
}

cn2_status cn2_riccati(const double* c0, const double* ts, int nt, double class_tol, char** json) {
  return guarded([&] {
    require(c0 && json && (ts || nt == 0) && nt >= 0, "null argument");
    require(class_tol > 0, "class tolerance must be positive");
    cn2::Mat2 C;
    C << c0[0], c0[1], c0[2], c0[3];
    *json = copy_out(cn2::dump(cn2::riccati_json(C, std::vector<double>(ts, ts + nt), class_tol)));
  });
}

void cn2_splitting_options_default(cn2_splitting_options* opt) {
  if (!opt) return;
  cn2::SplittingOptions s;
  opt->h_c = s.h_C;
  opt->class_tol = s.class_tol;
  opt->tau_rank = s.curvature.tau_rank;
  opt->tau_flat = s.curvature.tau_flat;
  opt->t_max = 0.0;
  opt->samples = 21;
  opt->jacobi_t_max = 0.0;
}

cn2_status cn2_splitting(const cn2_atlas* atlas, int block, const double* p, const double* hint,
                         const cn2_splitting_options* opt, char** json) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json, "null argument");
    check_block(at, block);
    cn2_splitting_options o;
    cn2_splitting_options_default(&o);
    if (opt) o = *opt;
    require(o.h_c > 0 && o.class_tol > 0 && o.tau_rank > 0 && o.tau_flat > 0 && o.t_max >= 0 &&
                o.jacobi_t_max >= 0 && o.samples >= 2,
            "splitting options must be positive");
    cn2::SplittingOptions s;
    s.h_C = o.h_c;
    s.class_tol = o.class_tol;
    s.curvature.tau_rank = o.tau_rank;
    s.curvature.tau_flat = o.tau_flat;
    cn2::Vec x = vec_of(p, at.dim, "null point");
    cn2::Vec h = hint ? vec_of(hint, at.dim, "") : cn2::Vec(cn2::Vec::Unit(at.dim, at.dim - 1));
    cn2::AdaptedFrame f = cn2::adapted_frame(at, block, x, h, s);
    cn2::SplittingTensor st = cn2::splitting_tensor(at, block, f, s);
    cn2::Json j = cn2::splitting_json(f, st);
    j["divergence"] = cn2::divergence_json(cn2::divergence_check(at, block, x, h, s));
    if (o.t_max > 0) j["field"] = cn2::riccati_field_json(cn2::riccati_field_check(at, block, x, h, o.t_max, o.samples, s));
    if (o.jacobi_t_max > 0)
      j["jacobi"] = cn2::jacobi_json(cn2::jacobi_check(at, block, x, f.T, f.e1, o.jacobi_t_max, s.curvature));
    *json = copy_out(cn2::dump(j));
  });
}

void cn2_detect_options_default(cn2_detect_options* opt) {
  if (!opt) return;
  cn2::DetectOptions d;
  opt->h = d.grid.h;
  opt->min_cells = d.grid.min_cells;
  opt->kappa = d.kappa;
  opt->m_cap = d.m_cap;
  opt->rho = d.rho;
  opt->tol_par = d.tol_par;
  opt->tol_bnl = d.tol_bnl;
  opt->tol_cyl = d.tol_cyl;
  opt->tau_rank = d.grid.curvature.tau_rank;
  opt->tau_flat = d.grid.curvature.tau_flat;
  opt->threads = 1;
}

cn2_status cn2_detect_graph(const cn2_atlas* atlas, const cn2_detect_options* opt, char** report_json,
                            char** cells_csv, int* not_cn2) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(report_json, "null argument");
    cn2::DetectResult r = cn2::detect_graph(at, detect_options(opt));
    std::string rep = r.report.to_json() + "\n";
    std::string cells = cells_csv ? r.cells_csv() : std::string();
    *report_json = copy_out(rep);
    if (cells_csv) *cells_csv = copy_out(cells);
    if (not_cn2) *not_cn2 = r.report.verdict == "NotCN2" ? 1 : 0;
  });
}

cn2_status cn2_volume(const cn2_atlas* atlas, const cn2_region* region, double h, const cn2_detect_options* opt,
                      char** json) {
  return guarded([&] {
    const cn2::Atlas& at = atlas_of(atlas);
    require(json, "null argument");
    require(h > 0, "h must be positive");
    cn2::VolumeRegion reg = cn2::VolumeRegion::all();
    if (region && region->kind == CN2_REGION_COMPONENT) {
      require(region->component >= 0, "component id must be non-negative");
      reg = cn2::VolumeRegion::of_component(region->component);
    } else if (region && region->kind == CN2_REGION_BOX) {
      check_block(at, region->block);
      reg = cn2::VolumeRegion::box(region->block, vec_of(region->lo, at.dim, "null box corner"),
                                   vec_of(region->hi, at.dim, "null box corner"));
    } else {
      require(!region || region->kind == CN2_REGION_ALL, "unknown region kind");
    }
    *json = copy_out(cn2::volume(at, reg, h, detect_options(opt)).to_json() + "\n");
  });
}

cn2_status cn2_suite_list(char** json) {
  return guarded([&] {
    require(json, "null argument");
    cn2::Json j = cn2::Json::array();
    for (const auto& s : cn2::suite_list()) j.push_back({{"name", s.name}, {"summary", s.summary}});
    *json = copy_out(cn2::dump(j));
  });
}

cn2_status cn2_verify(const char* suite, uint64_t seed, int threads, char** json, int* passed, int* failed) {
  return guarded([&] {
    require(suite && json, "null argument");
    cn2::SuiteResult r = cn2::run_suite(suite, seed, resolve_threads(threads));
    *json = copy_out(r.to_json() + "\n");
    if (passed) *passed = r.passed();
    if (failed) *failed = r.failed();
  });
}

}  // extern "C"
