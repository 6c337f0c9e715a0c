#include <chrono>
#include <cmath>
#include <numbers>

#include "builtins.hpp"
#include "json.hpp"
#include "verify_internal.hpp"
#include "volume.hpp"

namespace cn2 {

using namespace verify_detail;

namespace {

DetectOptions grid_options(double h, int threads) {
  DetectOptions o;
  o.grid.h = h;
  o.grid.threads = threads;
  return o;
}

SuiteResult suite_volume() {
  SuiteResult res;
  Atlas flat = make_flat(3);
  double worst = 0.0;
  for (double h : {0.25, 0.125, 0.1, 1.0 / 32}) worst = std::max(worst, std::abs(volume(flat, VolumeRegion::all(), h).value - 8.0));
  res.checks.push_back(make_check("flat [0,2]^3 volume = 8", worst, 1e-10, "h in {1/4, 1/8, 1/10, 1/32}"));

  // adaptive Gauss-Kronrod value of the truncated strip integral (mpmath, 30 digits)
  const double oracle = 2.152547871481177;
  Atlas strip = make_strip_cylinder();
  VolumeResult v = volume(strip, VolumeRegion::all(), 1.0 / 64);
  res.checks.push_back(make_check("strip area vs quadrature oracle", std::abs(v.extrapolated - oracle), 1e-6,
                                  "Richardson value " + num(v.extrapolated)));
  res.checks.push_back(make_check("strip raw sum within its error estimate", std::abs(v.value - oracle), 2 * v.error,
                                  "error estimate " + num(v.error)));
  res.checks.push_back(make_check("strip observed order near 2", std::abs(v.order - 2.0), 0.25,
                                  "order " + num(v.order)));
  res.checks.push_back(bool_check("strip area finite", std::isfinite(v.value) && v.value > 0, ""));

  Atlas ex1 = make_ex1();
  VolumeResult e = volume(ex1, VolumeRegion::all(), 1.0 / 16);
  res.checks.push_back(bool_check("ex1 volume exceeds the flat 16", e.extrapolated > 16.0 && e.extrapolated < 16.0 * 1.82,
                                  "value " + num(e.extrapolated)));
  Vec lo(3), hi(3);
  lo << -1, -1, -1;
  hi << 1, 1, 1;
  VolumeResult bx = volume(ex1, VolumeRegion::box(0, lo, hi), 1.0 / 16);
  res.checks.push_back(make_check("ex1 box of one block is half the total", std::abs(2 * bx.value - e.value), 1e-9, ""));
  return res;
}

SuiteResult suite_profile(int threads) {
  SuiteResult res;
  Atlas ex1 = make_ex1();
  DetectResult r = detect_graph(ex1, grid_options(1.0 / 16, threads));
  const GraphReport& rep = r.report;
  res.checks.push_back(make_check("ex1 boundary cells failing 2 <= #clusters <= m", rep.profile_failures, 0,
                                  std::to_string(rep.boundary_cells) + " boundary cells"));
  res.checks.push_back(bool_check("ex1 has boundary cells", rep.boundary_cells > 0, ""));
  double dev = std::max(std::abs(rep.min_cluster_angle - std::numbers::pi / 2),
                        std::abs(rep.max_cluster_angle - std::numbers::pi / 2));
  res.checks.push_back(make_check("ex1 inter-cluster angle = pi/2", dev, 0.05, ""));

  // one-sided slab: forget the second component, so every Boundary cell sees a single side
  ExtensionState e = r.extension;
  for (std::size_t c = 0; c < e.comp.size(); ++c)
    if (e.comp[c] == 1) {
      e.comp[c] = -1;
      e.label[c] = CellLabel::Unresolved;
    }
  int boundary = 0, failing = 0;
  for (std::size_t c = 0; c < e.label.size(); ++c) {
    if (e.label[c] != CellLabel::Boundary) continue;
    ++boundary;
    if (!boundary_profile(r.sample, e, static_cast<int>(c), rep.options.rho, rep.options.tol_bnl).pass) ++failing;
  }
  res.checks.push_back(bool_check("one-sided slab fires the profile failure", boundary > 0 && failing == boundary,
                                  std::to_string(failing) + "/" + std::to_string(boundary)));
  return res;
}

SuiteResult suite_refinement(int threads) {
  SuiteResult res;
  Atlas ex1 = make_ex1();
  DetectResult a = detect_graph(ex1, grid_options(1.0 / 16, threads));
  DetectResult b = detect_graph(ex1, grid_options(1.0 / 32, threads));
  auto thickness = [](const GraphReport& r) {
    int t = 0;
    for (const auto& e : r.edges) t = std::max(t, e.thickness);
    return t;
  };
  res.checks.push_back(make_check("cylinder residual does not grow under refinement",
                                  b.report.max_cylinder_residual - a.report.max_cylinder_residual, 1e-12,
                                  num(a.report.max_cylinder_residual) + " -> " + num(b.report.max_cylinder_residual)));
  res.checks.push_back(make_check("sheet thickness (cells) does not grow", thickness(b.report) - thickness(a.report), 0,
                                  std::to_string(thickness(a.report)) + " -> " + std::to_string(thickness(b.report))));
  for (const DetectResult* d : {&a, &b}) {
    bool kept = true;
    for (std::size_t c = 0; c < d->sample.cells.size(); ++c)
      if (!d->sample.cells[c].flat && (d->extension.label[c] != CellLabel::Nonflat || d->extension.comp[c] < 0))
        kept = false;
    res.checks.push_back(bool_check("nonflat cells keep their label (h = " + num(d->report.h) + ")", kept, ""));
  }
  return res;
}

}  // namespace

std::string ReferenceRuns::json() const {
  return "[" + ex1.to_json() + ",\n" + ex2.to_json() + ",\n" + ex2_fine.to_json() + ",\n" + ex3.to_json() + "]\n";
}

ReferenceRuns reference_detections(int threads) {
  auto t0 = std::chrono::steady_clock::now();
  ReferenceRuns r;
  r.ex1 = detect_graph(make_ex1(), grid_options(1.0 / 16, threads)).report;
  Atlas ex2 = make_ex2();
  r.ex2 = detect_graph(ex2, grid_options(1.0 / 16, threads)).report;
  r.ex2_fine = detect_graph(ex2, grid_options(1.0 / 32, threads)).report;
  DetectOptions o3 = grid_options(1.0 / 8, threads);
  o3.grid.min_cells = 4;
  o3.m_cap = 4;
  r.ex3 = detect_graph(make_ex3(6), o3).report;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<Check> detection_checks(const ReferenceRuns& r) {
  std::vector<Check> out;
  out.push_back(bool_check("ex1 h=1/16: GeometricGraphManifold with 2 nodes and 2 edges",
                           r.ex1.verdict == "GeometricGraphManifold" && r.ex1.nodes.size() == 2 && r.ex1.edges.size() == 2,
                           r.ex1.verdict + ", " + std::to_string(r.ex1.nodes.size()) + " nodes, " +
                               std::to_string(r.ex1.edges.size()) + " edges"));
  out.push_back(bool_check("ex2 h=1/16: NonDenseExtension", r.ex2.verdict == "NonDenseExtension",
                           r.ex2.verdict + ", unresolved fraction " + num(r.ex2.unresolved_fraction)));
  double ratio = r.ex2.unresolved_fraction > 0 ? r.ex2_fine.unresolved_fraction / r.ex2.unresolved_fraction : 0.0;
  out.push_back(make_check("ex2 unresolved fraction stable under h -> h/2", std::abs(ratio - 1.0), 0.2,
                           num(r.ex2.unresolved_fraction) + " -> " + num(r.ex2_fine.unresolved_fraction)));
  out.push_back(bool_check("ex3(N=6) adapted: NotLocallyFinite with max m >= 5",
                           r.ex3.verdict == "NotLocallyFinite" && r.ex3.max_m >= 5,
                           r.ex3.verdict + ", max m " + std::to_string(r.ex3.max_m)));
  out.push_back(make_check("runtime (s)", r.seconds, 600.0, ""));
  return out;
}

const std::vector<SuiteInfo>& suite_list() {
  static const std::vector<SuiteInfo> list = {
      {"curvature", "reference curvatures, tensor symmetries, Bianchi, compatibility, scaling"},
      {"nullity", "nullity dimension and direction on ex1, sphere_product, cone; sphere3 is NotCN2"},
      {"riccati", "C' = C^2 against its closed form, trace/det evolution, nilpotent and blowup cases"},
      {"cone-field", "splitting tensor along cone nullity geodesics, frame and scaling behavior"},
      {"divergence", "div T + tr C = 0 on the cone and ex1"},
      {"holonomy", "holonomy angle bound on random rectangles, spherical cap equality"},
      {"jacobi", "Jacobi fields along nullity geodesics versus parallel transport"},
      {"transport", "geodesic closure, speed, transport reversibility, principal angles"},
      {"volume", "flat torus volume, strip area against quadrature, Richardson order"},
      {"profile", "boundary profile law on ex1 and a one-sided slab"},
      {"refinement", "ex1 at h=1/16 and 1/32: residual and sheet thickness monotone, nonflat labels kept"},
      {"detect", "end-to-end verdicts on ex1, ex2, ex3"},
      {"determinism", "two runs of the end-to-end detections give identical JSON"},
  };
  return list;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, int threads) {
  SuiteResult res;
  bool known = false;
  for (const auto& s : suite_list()) known = known || s.name == name;
  if (!known) throw Error(ErrorCode::InvalidArgument, "unknown suite '" + name + "'");
  if (name == "volume") {
    res = suite_volume();
  } else if (name == "profile") {
    res = suite_profile(threads);
  } else if (name == "refinement") {
    res = suite_refinement(threads);
  } else if (name == "detect") {
    res.checks = detection_checks(reference_detections(threads));
  } else if (name == "determinism") {
    ReferenceRuns a = reference_detections(threads), b = reference_detections(threads);
    res.checks.push_back(bool_check("byte-identical reports", a.json() == b.json(),
                                    std::to_string(a.json().size()) + " bytes"));
  } else {
    res = run_point_suite(name, seed);
  }
  res.suite = name;
  res.seed = seed;
  return res;
}

}  // namespace cn2
