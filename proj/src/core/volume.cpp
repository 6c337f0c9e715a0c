#include "volume.hpp"

#include <cmath>

#include "json.hpp"

namespace cn2 {

VolumeRegion VolumeRegion::box(int block, const Vec& lo, const Vec& hi) {
  VolumeRegion r;
  r.kind = Kind::Box;
  r.block = block;
  r.lo = lo;
  r.hi = hi;
  return r;
}

VolumeRegion VolumeRegion::of_component(int id) {
  VolumeRegion r;
  r.kind = Kind::Component;
  r.component = id;
  return r;
}

namespace {

// Counts are multiples of 4 at level 1 so that levels 2 and 4 halve the spacing exactly.
double box_sum(const MetricField& f, const Vec& lo, const Vec& hi, double h, int level, long long& cells) {
  const int n = f.dim();
  std::array<long long, 4> cnt{};
  std::array<double, 4> w{};
  double dv = 1.0;
  long long total = 1;
  for (int a = 0; a < n; ++a) {
    cnt[a] = 4 * std::max<long long>(1, std::llround((hi[a] - lo[a]) / (4 * h))) / level;
    w[a] = (hi[a] - lo[a]) / cnt[a];
    dv *= w[a];
    total *= cnt[a];
  }
  if (total > 200'000'000) throw Error(ErrorCode::InvalidArgument, "volume grid has too many cells");
  cells += total;
  // compensated summation keeps the flat-torus error at rounding level
  double sum = 0.0, comp = 0.0;
  Vec x(n);
  for (long long i = 0; i < total; ++i) {
    long long r = i;
    for (int a = n - 1; a >= 0; --a) {
      x[a] = lo[a] + (r % cnt[a] + 0.5) * w[a];
      r /= cnt[a];
    }
    Mat g = f.value(x);
    check_positive_definite(g);
    double y = std::sqrt(g.determinant()) - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum * dv;
}

double region_sum(const Atlas& atlas, const VolumeRegion& region, double h, int level, const DetectOptions& opt,
                  long long& cells) {
  switch (region.kind) {
    case VolumeRegion::Kind::All: {
      double s = 0.0;
      for (std::size_t b = 0; b < atlas.blocks.size(); ++b) {
        const ChartSpec& c = atlas.chart(static_cast<int>(b));
        s += box_sum(*atlas.blocks[b].field, c.lo, c.hi, h, level, cells);
      }
      return s;
    }
    case VolumeRegion::Kind::Box: {
      if (region.block < 0 || region.block >= static_cast<int>(atlas.blocks.size()))
        throw Error(ErrorCode::InvalidArgument, "volume box names an unknown block");
      const ChartSpec& c = atlas.chart(region.block);
      if (region.lo.size() != atlas.dim || region.hi.size() != atlas.dim)
        throw Error(ErrorCode::DimensionMismatch, "volume box has wrong dimension");
      for (int a = 0; a < atlas.dim; ++a)
        if (!(region.lo[a] < region.hi[a]) || region.lo[a] < c.lo[a] - 1e-12 || region.hi[a] > c.hi[a] + 1e-12)
          throw Error(ErrorCode::InvalidArgument, "volume box must be nonempty and inside its block");
      return box_sum(*atlas.blocks[region.block].field, region.lo, region.hi, h, level, cells);
    }
    case VolumeRegion::Kind::Component: {
      DetectOptions o = opt;
      o.grid.h = h * level;
      o.grid.min_cells = std::max(o.grid.min_cells, 0);
      DetectResult r = detect_graph(atlas, o);
      const auto& nodes = r.report.nodes;
      if (region.component < 0 || region.component >= static_cast<int>(nodes.size()))
        throw Error(ErrorCode::InvalidArgument, "no component " + std::to_string(region.component) + " at this resolution");
      cells += r.report.cell_count;
      return nodes[region.component].volume;
    }
  }
  return 0.0;
}

}  // namespace

VolumeResult volume(const Atlas& atlas, const VolumeRegion& region, double h, const DetectOptions& opt) {
  if (!(h > 0)) throw Error(ErrorCode::InvalidArgument, "volume spacing must be positive");
  VolumeResult r;
  r.value = region_sum(atlas, region, h, 1, opt, r.cells);
  long long scratch = 0;
  r.coarse = region_sum(atlas, region, h, 2, opt, scratch);
  r.coarser = region_sum(atlas, region, h, 4, opt, scratch);
  r.error = std::abs(r.value - r.coarse) / 3.0;
  r.extrapolated = r.value + (r.value - r.coarse) / 3.0;
  double d1 = std::abs(r.coarse - r.coarser), d0 = std::abs(r.value - r.coarse);
  if (d0 > 0 && d1 > 0) r.order = std::log2(d1 / d0);
  return r;
}

std::string VolumeResult::to_json() const {
  nlohmann::ordered_json j;
  j["value"] = value;
  j["error"] = error;
  j["extrapolated"] = extrapolated;
  j["coarse"] = coarse;
  j["coarser"] = coarser;
  j["order"] = order;
  j["cells"] = cells;
  return j.dump(2);
}

}  // namespace cn2
