#pragma once

// Riemannian volume by the midpoint rule on block grids, with a Richardson
// error estimate from the same sum at twice and four times the spacing.

#include <string>

#include "graph.hpp"

namespace cn2 {

struct VolumeRegion {
  enum class Kind { All, Component, Box };
  Kind kind = Kind::All;
  int component = -1;  // final component id of the grid extension at the same h
  int block = 0;       // Box: block coordinates
  Vec lo, hi;

  static VolumeRegion all() { return {}; }
  static VolumeRegion box(int block, const Vec& lo, const Vec& hi);
  static VolumeRegion of_component(int id);
};

struct VolumeResult {
  double value = 0.0;         // midpoint sum at h
  double coarse = 0.0;        // at 2h
  double coarser = 0.0;       // at 4h
  double extrapolated = 0.0;  // value + (value - coarse) / 3
  double error = 0.0;         // |value - coarse| / 3
  double order = 0.0;         // observed, from the three sums; 0 when undefined
  long long cells = 0;
  std::string to_json() const;
};

/// Component regions run the grid detector (opt.grid.h is replaced by h).
VolumeResult volume(const Atlas& atlas, const VolumeRegion& region, double h, const DetectOptions& opt = {});

}  // namespace cn2
