#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "graph.hpp"

namespace cn2 {

DetectResult detect_graph(const Atlas& atlas, const DetectOptions& in) {
  DetectOptions opt = in;
  const double h = opt.grid.h;
  if (opt.rho <= 0) opt.rho = 4 * h;
  if (opt.tol_par <= 0) opt.tol_par = std::max(1e-4, 10 * h * h);
  if (opt.tol_bnl <= 0) opt.tol_bnl = std::max(1e-4, 10 * h * h);
  if (opt.m_cap < 1 || !(opt.kappa > 0)) throw Error(ErrorCode::InvalidArgument, "m_cap and kappa must be positive");

  DetectResult res;
  GraphReport& rep = res.report;
  rep.space = atlas.label;
  rep.h = h;
  rep.options = opt;
  res.sample = sample_grid(atlas, opt.grid);
  const GridSample& s = res.sample;
  rep.cell_count = static_cast<int>(s.cells.size());
  if (s.notcn2_cell >= 0) {
    rep.notcn2_cell = s.notcn2_cell;
    rep.verdict = "NotCN2";
    return res;
  }
  res.components = nonflat_components(s);
  rep.nonflat_components = res.components.count;
  double nonflat_volume = 0.0;
  for (const Cell& c : s.cells) {
    rep.total_volume += c.volume;
    if (!c.flat) nonflat_volume += c.volume;
  }
  rep.flat_volume = rep.total_volume - nonflat_volume;
  if (res.components.count == 0) {
    rep.verdict = "FlatEverywhere";
    rep.dense = true;
    rep.locally_finite = true;
    return res;
  }
  std::vector<double> cyl = cylinder_residuals(s, res.components);
  res.extension = extend(s, res.components, opt.tol_par, opt.tol_bnl);
  const ExtensionState& e = res.extension;
  rep.merges = e.merges;

  rep.nodes.resize(e.count);
  for (int i = 0; i < e.count; ++i) {
    rep.nodes[i].id = i;
    for (int o : e.origin[i]) rep.nodes[i].cylinder_residual = std::max(rep.nodes[i].cylinder_residual, cyl[o]);
    rep.max_cylinder_residual = std::max(rep.max_cylinder_residual, rep.nodes[i].cylinder_residual);
  }
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    if (e.label[c] == CellLabel::Unresolved) rep.unresolved_volume += s.cells[c].volume;
    if (e.comp[c] < 0) continue;
    GraphNode& nd = rep.nodes[e.comp[c]];
    ++nd.cells;
    if (!s.cells[c].flat) ++nd.nonflat_cells;
    nd.volume += s.cells[c].volume;
  }
  rep.unresolved_fraction = rep.flat_volume > 0 ? rep.unresolved_volume / rep.flat_volume : 0.0;
  rep.dense = rep.unresolved_fraction <= opt.kappa * h;

  bool first_angle = true;
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    if (e.label[c] != CellLabel::Boundary) continue;
    BoundaryProfile bp = boundary_profile(s, e, static_cast<int>(c), opt.rho, opt.tol_bnl);
    ++rep.boundary_cells;
    rep.max_m = std::max(rep.max_m, bp.m);
    rep.max_clusters = std::max(rep.max_clusters, bp.clusters);
    if (!bp.pass) ++rep.profile_failures;
    if (bp.m != bp.m_half) ++rep.unstable_m;
    if (bp.pass) {
      for (int i = 0; i < bp.clusters; ++i)
        for (int j = i + 1; j < bp.clusters; ++j) {
          double a = bp.angles[i * bp.clusters + j];
          if (first_angle) {
            rep.min_cluster_angle = rep.max_cluster_angle = a;
            first_angle = false;
          }
          rep.min_cluster_angle = std::min(rep.min_cluster_angle, a);
          rep.max_cluster_angle = std::max(rep.max_cluster_angle, a);
        }
    }
    res.profiles.push_back(std::move(bp));
  }
  rep.locally_finite = rep.max_m <= opt.m_cap && rep.unstable_m == 0;
  rep.edges = detect_surfaces(s, e, opt.grid.curvature.tau_flat);

  bool all_accepted = std::all_of(rep.edges.begin(), rep.edges.end(), [](auto& sf) { return sf.accepted; });
  if (!rep.dense) {
    rep.verdict = "NonDenseExtension";
  } else if (!rep.locally_finite) {
    rep.verdict = "NotLocallyFinite";
  } else if (rep.profile_failures > 0 || !all_accepted || rep.max_cylinder_residual > opt.tol_cyl) {
    rep.verdict = "Inconclusive";
  } else {
    rep.verdict = "GeometricGraphManifold";
  }
  return res;
}

std::string GraphReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["space"] = space;
  j["verdict"] = verdict;
  j["h"] = h;
  j["cells"] = cell_count;
  j["tolerances"] = {{"tau_rank", options.grid.curvature.tau_rank},
                     {"tau_flat", options.grid.curvature.tau_flat},
                     {"tol_par", options.tol_par},
                     {"tol_bnl", options.tol_bnl},
                     {"tol_cyl", options.tol_cyl},
                     {"kappa", options.kappa},
                     {"m_cap", options.m_cap},
                     {"rho", options.rho}};
  if (notcn2_cell >= 0) {
    j["notcn2_cell"] = notcn2_cell;
    return j.dump(2);
  }
  j["flags"] = {{"dense", dense}, {"locally_finite", locally_finite}};
  j["volume"] = {{"total", total_volume},
                 {"flat", flat_volume},
                 {"unresolved", unresolved_volume},
                 {"unresolved_fraction", unresolved_fraction}};
  j["nonflat_components"] = nonflat_components;
  ordered_json nodes = ordered_json::array();
  for (const auto& nd : this->nodes)
    nodes.push_back({{"id", nd.id},
                     {"cells", nd.cells},
                     {"nonflat_cells", nd.nonflat_cells},
                     {"volume", nd.volume},
                     {"cylinder_residual", nd.cylinder_residual}});
  j["nodes"] = nodes;
  ordered_json edges = ordered_json::array();
  for (std::size_t i = 0; i < this->edges.size(); ++i) {
    const auto& sf = this->edges[i];
    ordered_json sides = ordered_json::array();
    for (int sd : sf.sides) sides.push_back(sd >= 0 ? ordered_json(sd) : ordered_json("unresolved"));
    edges.push_back({{"id", i},
                     {"cells", sf.cells.size()},
                     {"sides", sides},
                     {"flatness", sf.flatness},
                     {"closed", sf.closed},
                     {"thickness", sf.thickness},
                     {"accepted", sf.accepted}});
  }
  j["edges"] = edges;
  j["boundary"] = {{"cells", boundary_cells},
                   {"max_m", max_m},
                   {"max_clusters", max_clusters},
                   {"profile_failures", profile_failures},
                   {"unstable_m", unstable_m},
                   {"min_cluster_angle", min_cluster_angle},
                   {"max_cluster_angle", max_cluster_angle}};
  j["max_cylinder_residual"] = max_cylinder_residual;
  ordered_json merges_j = ordered_json::array();
  for (const auto& m : merges) merges_j.push_back({{"round", m.round}, {"a", m.a}, {"b", m.b}});
  j["merges"] = merges_j;
  return j.dump(2);
}

std::string DetectResult::cells_csv() const {
  const GridSample& s = sample;
  std::ostringstream os;
  os.precision(17);
  os << "cell,block";
  for (int a = 0; a < s.n; ++a) os << ",x" << a + 1;
  os << ",scal,mu,label,component\n";
  const bool have_ext = !extension.label.empty();
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    Vec x = s.center(static_cast<int>(c));
    os << c << ',' << s.cells[c].block;
    for (int a = 0; a < s.n; ++a) os << ',' << x[a];
    os << ',' << s.cells[c].scal << ',' << int(s.cells[c].mu) << ',';
    if (have_ext) {
      os << cell_label_name(extension.label[c]) << ',' << extension.comp[c];
    } else {
      os << (s.cells[c].flat ? "Unresolved" : "Nonflat") << ",-1";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace cn2
