#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cn2/cn2.h"
#include "json.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kNotCN2 = 2;

struct Failure {
  int code;
};

struct Global {
  int threads = 1;
  bool fd = false;
};

struct Input {
  std::string builtin, params, spec;
  int block = 0;
};

using AtlasPtr = std::unique_ptr<cn2_atlas, decltype(&cn2_atlas_free)>;

struct Owned {
  char* s = nullptr;
  ~Owned() { cn2_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

int exit_code_for(cn2_status st) { return st == CN2_ERR_NOT_CN2_POINT ? kNotCN2 : kUsage; }

void check(cn2_status st) {
  if (st == CN2_OK) return;
  std::cerr << "error: " << cn2_status_name(st) << ": " << cn2_last_error() << "\n";
  throw Failure{exit_code_for(st)};
}

void add_input(CLI::App* sub, Input& in) {
  auto* b = sub->add_option("--builtin", in.builtin, "builtin family name (see `builtin --list`)");
  sub->add_option("--params", in.params, "builtin parameters, key=value,key=value")->needs(b);
  sub->add_option("--spec", in.spec, "metric spec file")->excludes(b);
  sub->add_option("--block", in.block, "block index for point coordinates")->capture_default_str();
}

AtlasPtr open(const Input& in, const Global& g) {
  if (in.builtin.empty() == in.spec.empty()) {
    std::cerr << "error: give exactly one of --builtin or --spec\n";
    throw Failure{kUsage};
  }
  cn2_atlas* a = nullptr;
  if (!in.builtin.empty()) {
    check(cn2_atlas_builtin(in.builtin.c_str(), in.params.empty() ? nullptr : in.params.c_str(), &a));
  } else {
    check(cn2_atlas_load(in.spec.c_str(), &a));
  }
  AtlasPtr p(a, &cn2_atlas_free);
  cn2_atlas_set_fd(a, g.fd ? 1 : 0);
  return p;
}

void need_dim(const std::vector<double>& v, int n, const char* flag) {
  if (static_cast<int>(v.size()) != n) {
    std::cerr << "error: " << flag << " needs " << n << " comma-separated values\n";
    throw Failure{kUsage};
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << "error: Io: cannot write " << path << "\n";
    throw Failure{kUsage};
  }
}

CLI::Option* vec_option(CLI::App* sub, const std::string& name, std::vector<double>& v, const std::string& help) {
  return sub->add_option(name, v, help)->delimiter(',')->expected(1, 64);
}

void add_curvature(CLI::App* sub, cn2_curvature_options& c) {
  sub->add_option("--tau-rank", c.tau_rank, "relative rank cut for the nullity")->capture_default_str();
  sub->add_option("--tau-flat", c.tau_flat, "flatness threshold on |R|")->capture_default_str();
}

void add_flow(CLI::App* sub, cn2_flow_options& f) {
  sub->add_option("--rtol", f.rtol, "integrator relative tolerance")->capture_default_str();
  sub->add_option("--atol", f.atol, "integrator absolute tolerance")->capture_default_str();
  sub->add_option("--h-max", f.h_max, "maximum step, 0 for half the atlas margin")->capture_default_str();
}

double grid_h(int res, double h) {
  if (res > 0 && h > 0) {
    std::cerr << "error: --res and --cell-width are exclusive\n";
    throw Failure{kUsage};
  }
  return res > 0 ? 1.0 / res : h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cn2lab: curvature, nullity and graph-manifold detection for conullity-2 metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--threads", g.threads, "worker threads for grid phases, 0 for all cores")->capture_default_str();
  app.add_flag("--fd", g.fd, "finite differences instead of automatic differentiation");

  // analyze / classify
  Input in_an, in_cl;
  std::vector<double> pt_an, pt_cl;
  cn2_curvature_options co_an, co_cl;
  cn2_curvature_options_default(&co_an);
  cn2_curvature_options_default(&co_cl);
  std::string out_an, out_cl;
  auto* an = app.add_subcommand("analyze", "full curvature report at a point (JSON)");
  add_input(an, in_an);
  vec_option(an, "--point", pt_an, "point in block coordinates, x1,x2,...")->required();
  add_curvature(an, co_an);
  an->add_option("--out", out_an, "output file, default stdout");
  auto* cl = app.add_subcommand("classify", "point class, scalar curvature and nullity dimension (JSON)");
  add_input(cl, in_cl);
  vec_option(cl, "--point", pt_cl, "point in block coordinates, x1,x2,...")->required();
  add_curvature(cl, co_cl);
  cl->add_option("--out", out_cl, "output file, default stdout");

  // geodesic
  Input in_ge;
  std::vector<double> p_ge, v_ge;
  double t_ge = 1.0;
  cn2_flow_options fo_ge;
  cn2_flow_options_default(&fo_ge);
  std::string out_ge;
  auto* ge = app.add_subcommand("geodesic", "integrate a geodesic (CSV)");
  add_input(ge, in_ge);
  vec_option(ge, "--point", p_ge, "initial point")->required();
  vec_option(ge, "--velocity", v_ge, "initial velocity")->required();
  ge->add_option("--t-max", t_ge, "parameter length")->capture_default_str();
  add_flow(ge, fo_ge);
  ge->add_option("--out", out_ge, "output CSV, default stdout");

  // transport
  Input in_tr;
  std::vector<double> p_tr, v_tr, w_tr;
  double t_tr = 1.0;
  cn2_flow_options fo_tr;
  cn2_flow_options_default(&fo_tr);
  std::string out_tr;
  auto* tr = app.add_subcommand("transport", "parallel transport along a geodesic (JSON)");
  add_input(tr, in_tr);
  vec_option(tr, "--point", p_tr, "initial point")->required();
  vec_option(tr, "--velocity", v_tr, "initial velocity")->required();
  tr->add_option("--vectors", w_tr, "vectors to transport, concatenated, n values each")
      ->delimiter(',')
      ->expected(1, 4096)
      ->required();
  tr->add_option("--t-max", t_tr, "parameter length")->capture_default_str();
  add_flow(tr, fo_tr);
  tr->add_option("--out", out_tr, "output file, default stdout");

  // holonomy
  Input in_ho;
  std::vector<double> base_ho, xi_ho, u_ho, v_ho;
  std::vector<int> axes_ho{0, 1};
  cn2_flow_options fo_ho;
  cn2_flow_options_default(&fo_ho);
  std::string out_ho;
  auto* ho = app.add_subcommand("holonomy", "holonomy angle around a coordinate rectangle versus its bound (JSON)");
  add_input(ho, in_ho);
  vec_option(ho, "--base", base_ho, "point fixing the coordinates off the rectangle's plane")->required();
  ho->add_option("--axes", axes_ho, "the two coordinate axes spanning the rectangle, 0-based")
      ->delimiter(',')
      ->expected(2);
  ho->add_option("--u", u_ho, "u0,u1")->delimiter(',')->expected(2)->required();
  ho->add_option("--v", v_ho, "v0,v1")->delimiter(',')->expected(2)->required();
  vec_option(ho, "--xi", xi_ho, "vector to transport around the loop")->required();
  add_flow(ho, fo_ho);
  ho->add_option("--out", out_ho, "output file, default stdout");

  // riccati
  std::vector<double> c0_ri, t_ri{1.0};
  double tol_ri = 1e-9;
  std::string out_ri;
  auto* ri = app.add_subcommand("riccati", "closed-form solution of C' = C^2 (JSON)");
  ri->add_option("--c0", c0_ri, "C0 row-major: c11,c12,c21,c22")->delimiter(',')->expected(4)->required();
  ri->add_option("--t", t_ri, "sample times, comma-separated")->delimiter(',')->expected(1, 4096)->capture_default_str();
  ri->add_option("--class-tol", tol_ri, "tolerance for zero and nilpotent classes")->capture_default_str();
  ri->add_option("--out", out_ri, "output file, default stdout");

  // splitting
  Input in_sp;
  std::vector<double> p_sp, hint_sp;
  cn2_splitting_options so;
  cn2_splitting_options_default(&so);
  std::string out_sp;
  auto* sp = app.add_subcommand("splitting", "splitting tensor, divergence identity, optional Riccati and Jacobi checks (JSON)");
  add_input(sp, in_sp);
  vec_option(sp, "--point", p_sp, "nonflat point with one-dimensional nullity")->required();
  vec_option(sp, "--hint", hint_sp, "vector orienting the unit nullity, default last axis");
  sp->add_option("--h-c", so.h_c, "central-difference step for the nullity field")->capture_default_str();
  sp->add_option("--class-tol", so.class_tol, "tolerance for zero and nilpotent classes")->capture_default_str();
  sp->add_option("--tau-rank", so.tau_rank, "relative rank cut for the nullity")->capture_default_str();
  sp->add_option("--tau-flat", so.tau_flat, "flatness threshold on |R|")->capture_default_str();
  sp->add_option("--t-max", so.t_max, "follow C along the nullity geodesic up to this time, 0 to skip")
      ->capture_default_str();
  sp->add_option("--samples", so.samples, "samples along the nullity geodesic")->capture_default_str();
  sp->add_option("--jacobi-t-max", so.jacobi_t_max, "Jacobi field check length, 0 to skip")->capture_default_str();
  sp->add_option("--out", out_sp, "output file, default stdout");

  // detect-graph
  Input in_dg;
  cn2_detect_options dopt;
  cn2_detect_options_default(&dopt);
  int res_dg = 0;
  double h_dg = 0.0;
  std::string out_dg, cells_dg;
  auto* dg = app.add_subcommand("detect-graph", "grid detection of a geometric graph manifold structure (JSON)");
  add_input(dg, in_dg);
  dg->add_option("--res", res_dg, "cells per unit length, h = 1/res (default 16)");
  dg->add_option("--cell-width", h_dg, "cell width, alternative to --res");
  dg->add_option("--min-cells", dopt.min_cells, "adapt h per block to at least this many cells per axis, 0 off")
      ->capture_default_str();
  dg->add_option("--kappa", dopt.kappa, "density constant: dense iff unresolved fraction <= kappa h")
      ->capture_default_str();
  dg->add_option("--mcap", dopt.m_cap, "local finiteness cap on m")->capture_default_str();
  dg->add_option("--rho", dopt.rho, "boundary profile radius, 0 for 4h")->capture_default_str();
  dg->add_option("--tol-par", dopt.tol_par, "plane agreement tolerance, 0 for max(1e-4, 10h^2)")->capture_default_str();
  dg->add_option("--tol-bnl", dopt.tol_bnl, "leaf clustering tolerance, 0 for max(1e-4, 10h^2)")->capture_default_str();
  dg->add_option("--tol-cyl", dopt.tol_cyl, "cylinder residual tolerance")->capture_default_str();
  dg->add_option("--tau-rank", dopt.tau_rank, "relative rank cut for the nullity")->capture_default_str();
  dg->add_option("--tau-flat", dopt.tau_flat, "flatness threshold on |R|")->capture_default_str();
  dg->add_option("--out", out_dg, "report JSON, default stdout");
  dg->add_option("--cells", cells_dg, "per-cell CSV");

  // volume
  Input in_vo;
  int res_vo = 0;
  double h_vo = 0.0;
  std::string region_vo = "all", out_vo;
  int comp_vo = 0;
  std::vector<double> lo_vo, hi_vo;
  cn2_detect_options vopt;
  cn2_detect_options_default(&vopt);
  auto* vo = app.add_subcommand("volume", "Riemannian volume with Richardson error estimate (JSON)");
  add_input(vo, in_vo);
  vo->add_option("--res", res_vo, "cells per unit length, h = 1/res (default 16)");
  vo->add_option("--cell-width", h_vo, "cell width, alternative to --res");
  vo->add_option("--region", region_vo, "all, component or box")
      ->check(CLI::IsMember({"all", "component", "box"}))
      ->capture_default_str();
  vo->add_option("--component", comp_vo, "component id for --region component")->capture_default_str();
  vec_option(vo, "--lo", lo_vo, "box lower corner for --region box");
  vec_option(vo, "--hi", hi_vo, "box upper corner for --region box");
  vo->add_option("--out", out_vo, "output file, default stdout");

  // builtin
  bool list_bu = false, json_bu = false;
  auto* bu = app.add_subcommand("builtin", "builtin metric families");
  bu->add_flag("--list", list_bu, "list families with their parameters");
  bu->add_flag("--json", json_bu, "list as JSON");

  // verify
  std::string suite_ve, out_ve;
  std::uint64_t seed_ve = 42;
  bool list_ve = false;
  auto* ve = app.add_subcommand("verify", "run a named invariant suite");
  ve->add_option("--suite", suite_ve, "suite name, or all");
  ve->add_option("--seed", seed_ve, "seed for randomized suites")->capture_default_str();
  ve->add_flag("--list", list_ve, "list the suites");
  ve->add_option("--out", out_ve, "suite result JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (*an || *cl) {
      bool full = an->parsed();
      const Input& in = full ? in_an : in_cl;
      AtlasPtr a = open(in, g);
      const auto& p = full ? pt_an : pt_cl;
      need_dim(p, cn2_atlas_dim(a.get()), "--point");
      Owned o;
      cn2_point_class cls = CN2_FLAT;
      if (full) {
        check(cn2_analyze(a.get(), in.block, p.data(), &co_an, &o.s, &cls));
      } else {
        check(cn2_classify(a.get(), in.block, p.data(), &co_cl, &o.s, &cls));
      }
      emit(o.str(), full ? out_an : out_cl);
      return cls == CN2_NOT_CN2 ? kNotCN2 : 0;
    }
    if (*ge) {
      AtlasPtr a = open(in_ge, g);
      int n = cn2_atlas_dim(a.get());
      need_dim(p_ge, n, "--point");
      need_dim(v_ge, n, "--velocity");
      Owned o;
      int complete = 0;
      check(cn2_geodesic(a.get(), in_ge.block, p_ge.data(), v_ge.data(), t_ge, &fo_ge, &o.s, &complete));
      emit(o.str(), out_ge);
      if (!complete) std::cerr << "note: geodesic left the domain before t-max\n";
      return 0;
    }
    if (*tr) {
      AtlasPtr a = open(in_tr, g);
      int n = cn2_atlas_dim(a.get());
      need_dim(p_tr, n, "--point");
      need_dim(v_tr, n, "--velocity");
      if (w_tr.empty() || w_tr.size() % n != 0) {
        std::cerr << "error: --vectors needs a multiple of " << n << " values\n";
        return kUsage;
      }
      Owned o;
      check(cn2_transport(a.get(), in_tr.block, p_tr.data(), v_tr.data(), t_tr, w_tr.data(),
                          static_cast<int>(w_tr.size()) / n, &fo_tr, &o.s));
      emit(o.str(), out_tr);
      return 0;
    }
    if (*ho) {
      AtlasPtr a = open(in_ho, g);
      int n = cn2_atlas_dim(a.get());
      need_dim(base_ho, n, "--base");
      need_dim(xi_ho, n, "--xi");
      Owned o;
      int ok = 0;
      check(cn2_holonomy(a.get(), in_ho.block, base_ho.data(), axes_ho[0], axes_ho[1], u_ho[0], u_ho[1], v_ho[0],
                         v_ho[1], xi_ho.data(), &fo_ho, &o.s, &ok));
      emit(o.str(), out_ho);
      return 0;
    }
    if (*ri) {
      Owned o;
      check(cn2_riccati(c0_ri.data(), t_ri.data(), static_cast<int>(t_ri.size()), tol_ri, &o.s));
      emit(o.str(), out_ri);
      return 0;
    }
    if (*sp) {
      AtlasPtr a = open(in_sp, g);
      int n = cn2_atlas_dim(a.get());
      need_dim(p_sp, n, "--point");
      if (!hint_sp.empty()) need_dim(hint_sp, n, "--hint");
      Owned o;
      check(cn2_splitting(a.get(), in_sp.block, p_sp.data(), hint_sp.empty() ? nullptr : hint_sp.data(), &so, &o.s));
      emit(o.str(), out_sp);
      return 0;
    }
    if (*dg) {
      AtlasPtr a = open(in_dg, g);
      double h = grid_h(res_dg, h_dg);
      if (h > 0) dopt.h = h;
      dopt.threads = g.threads;
      Owned rep, cells;
      int notcn2 = 0;
      check(cn2_detect_graph(a.get(), &dopt, &rep.s, cells_dg.empty() ? nullptr : &cells.s, &notcn2));
      emit(rep.str(), out_dg);
      if (!cells_dg.empty()) emit(cells.str(), cells_dg);
      return notcn2 ? kNotCN2 : 0;
    }
    if (*vo) {
      AtlasPtr a = open(in_vo, g);
      double h = grid_h(res_vo, h_vo);
      if (h <= 0) h = 1.0 / 16;
      cn2_region r{CN2_REGION_ALL, 0, in_vo.block, nullptr, nullptr};
      if (region_vo == "component") {
        r.kind = CN2_REGION_COMPONENT;
        r.component = comp_vo;
      } else if (region_vo == "box") {
        int n = cn2_atlas_dim(a.get());
        need_dim(lo_vo, n, "--lo");
        need_dim(hi_vo, n, "--hi");
        r.kind = CN2_REGION_BOX;
        r.lo = lo_vo.data();
        r.hi = hi_vo.data();
      }
      vopt.threads = g.threads;
      Owned o;
      check(cn2_volume(a.get(), &r, h, &vopt, &o.s));
      emit(o.str(), out_vo);
      return 0;
    }
    if (*bu) {
      Owned o;
      check(cn2_builtin_list(&o.s));
      if (json_bu) {
        std::cout << o.str();
        return 0;
      }
      if (!list_bu) {
        std::cerr << "error: builtin needs --list or --json\n";
        return kUsage;
      }
      for (const auto& b : nlohmann::json::parse(o.str())) {
        std::cout << b["name"].get<std::string>() << "\n  " << b["summary"].get<std::string>() << "\n";
        if (!b["params"].get<std::string>().empty()) std::cout << "  params: " << b["params"].get<std::string>() << "\n";
      }
      return 0;
    }
    if (*ve) {
      if (list_ve) {
        Owned o;
        check(cn2_suite_list(&o.s));
        std::cout << o.str();
        return 0;
      }
      if (suite_ve.empty()) {
        std::cerr << "error: verify needs --suite NAME (or --list)\n";
        return kUsage;
      }
      std::vector<std::string> names{suite_ve};
      if (suite_ve == "all") {
        Owned o;
        check(cn2_suite_list(&o.s));
        names.clear();
        for (const auto& s : nlohmann::json::parse(o.str())) names.push_back(s["name"].get<std::string>());
      }
      int total_failed = 0;
      std::string all_json;
      for (const auto& name : names) {
        Owned o;
        int passed = 0, failed = 0;
        check(cn2_verify(name.c_str(), seed_ve, g.threads, &o.s, &passed, &failed));
        std::cout << name << ": " << passed << " passed, " << failed << " failed\n";
        for (const auto& c : nlohmann::json::parse(o.str())["checks"])
          if (!c["pass"].get<bool>())
            std::cout << "  FAIL " << c["name"].get<std::string>() << " (" << c["value"].dump() << " > "
                      << c["tol"].dump() << ") " << c["detail"].get<std::string>() << "\n";
        total_failed += failed;
        all_json += o.str();
      }
      if (!out_ve.empty()) emit(all_json, out_ve);
      return total_failed > 0 ? kNotCN2 : 0;
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kUsage;
}
