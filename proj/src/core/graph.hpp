#pragma once

// Grid-scale detection of geometric graph manifold structure: sampling,
// nonflat components, nullity-plane extension, boundary profiles, separating
// sheets and the final verdict.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "curvature.hpp"

namespace cn2 {

struct GridOptions {
  double h = 1.0 / 16;
  int min_cells = 0;  // 0: h must divide every block width; >0: adaptive, at least this many cells per axis
  CurvatureOptions curvature;
  int threads = 1;
};

enum class CellLabel : std::uint8_t { Nonflat, Extended, Boundary, Unresolved };
const char* cell_label_name(CellLabel l);

struct Neighbor {
  std::int32_t cell = -1;  // -1: open face
  std::int32_t map = -1;   // -1: same block, identity; else index into GridSample::maps
};

/// Affine change of coordinates x_neighbor = A x + b across an identification.
struct EdgeMap {
  Mat A;
  Vec b;
};

struct Cell {
  std::int32_t block = 0;
  std::int32_t local = 0;  // row-major index within the block grid
  double scal = 0.0;
  double norm = 0.0;
  double volume = 0.0;
  std::int8_t mu = 0;
  bool flat = true;
  bool conn_zero = true;  // Christoffel symbols vanish at the center
  std::array<double, 8> plane{};  // nullity basis, n x (n-2) column-major, g-orthonormal
};

struct BlockGrid {
  std::array<int, 4> count{};
  std::array<double, 4> width{};  // cell widths
  int first = 0;                  // global index of the block's first cell
  int cells = 0;
};

struct GridSample {
  std::shared_ptr<const Atlas> atlas;  // own copy; blocks share their fields
  int n = 0;
  int k = 0;  // nullity dimension at nonflat cells, n - 2
  double h = 0.0;
  std::vector<BlockGrid> blocks;
  std::vector<Cell> cells;
  std::vector<Neighbor> nbr;  // 2n per cell, ordered (axis 0 -, axis 0 +, axis 1 -, ...)
  std::vector<EdgeMap> maps;
  int notcn2_cell = -1;

  Vec center(int cell) const;
  Mat plane(int cell) const;
  const Neighbor& neighbor(int cell, int axis, int side) const { return nbr[cell * 2 * n + axis * 2 + side]; }
  /// Neighbor center expressed in the unwrapped coordinates of `cell`.
  Vec neighbor_center(int cell, const Neighbor& nb) const;
  double cell_width(int cell, int axis) const { return blocks[cells[cell].block].width[axis]; }
};

GridSample sample_grid(const Atlas& atlas, const GridOptions& opt);

struct Components {
  std::vector<int> id;  // per cell, -1 for flat cells
  int count = 0;
};

Components nonflat_components(const GridSample& s);

/// Transport of a plane (n x k, coordinates of `from`) along the edge to the
/// neighbor, returned in the neighbor's coordinates.
Mat transport_edge(const GridSample& s, int from, const Neighbor& nb, const Mat& plane);

/// Largest principal angle between two planes at a cell.
double plane_angle(const GridSample& s, int cell, const Mat& a, const Mat& b);

/// Per component: max over intra-component edges of the transported-plane angle.
std::vector<double> cylinder_residuals(const GridSample& s, const Components& c);

struct MergeEvent {
  int round = 0;
  int a = 0, b = 0;  // component ids before renumbering
};

struct ExtensionState {
  std::vector<CellLabel> label;
  std::vector<int> comp;  // component id for Nonflat/Extended cells, else -1
  std::vector<std::array<double, 8>> plane;
  int count = 0;          // final component count
  std::vector<std::vector<int>> origin;  // per final component: the nonflat components merged into it
  std::vector<MergeEvent> merges;
  int rounds = 0;
};

ExtensionState extend(const GridSample& s, const Components& c, double tol_par, double tol_bnl);

struct BoundaryProfile {
  int cell = -1;
  double rho = 0.0;
  int m = 0;
  int m_half = 0;  // m at rho / 2
  std::vector<int> comps;
  int clusters = 0;
  std::vector<int> representatives;  // component ids
  std::vector<double> angles;        // row-major clusters x clusters
  bool pass = false;
};

BoundaryProfile boundary_profile(const GridSample& s, const ExtensionState& e, int cell, double rho, double tol_bnl);

struct SeparatingSurface {
  std::vector<int> cells;
  double flatness = 0.0;
  std::vector<int> sides;  // component ids, -2 for Unresolved
  bool closed = true;
  bool accepted = false;
  int thickness = 0;  // max Boundary run length across the sheet
};

std::vector<SeparatingSurface> detect_surfaces(const GridSample& s, const ExtensionState& e, double tau_flat);

struct DetectOptions {
  GridOptions grid;
  double kappa = 4.0;
  int m_cap = 8;
  double rho = 0.0;       // 0: 4h
  double tol_par = 0.0;   // 0: max(1e-4, 10 h^2)
  double tol_bnl = 0.0;
  double tol_cyl = 1e-4;
};

struct GraphNode {
  int id = 0;
  int cells = 0;
  int nonflat_cells = 0;
  double volume = 0.0;
  double cylinder_residual = 0.0;
};

struct GraphReport {
  std::string space;
  double h = 0.0;
  int cell_count = 0;
  int nonflat_components = 0;
  std::vector<GraphNode> nodes;
  std::vector<SeparatingSurface> edges;
  double total_volume = 0.0, flat_volume = 0.0, unresolved_volume = 0.0;
  double unresolved_fraction = 0.0;
  bool dense = false;
  bool locally_finite = false;
  int boundary_cells = 0;
  int max_m = 0;
  int max_clusters = 0;
  int profile_failures = 0;
  int unstable_m = 0;
  double min_cluster_angle = 0.0;  // smallest inter-cluster angle over passing profiles
  double max_cluster_angle = 0.0;
  double max_cylinder_residual = 0.0;
  std::vector<MergeEvent> merges;
  std::string verdict;
  DetectOptions options;
  int notcn2_cell = -1;

  std::string to_json() const;
};

struct DetectResult {
  GridSample sample;
  Components components;
  ExtensionState extension;
  std::vector<BoundaryProfile> profiles;
  GraphReport report;

  std::string cells_csv() const;
};

/// Full pipeline.
DetectResult detect_graph(const Atlas& atlas, const DetectOptions& opt);

}  // namespace cn2
