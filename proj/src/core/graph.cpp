#include "graph.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "flows.hpp"

namespace cn2 {

const char* cell_label_name(CellLabel l) {
  switch (l) {
    case CellLabel::Nonflat: return "Nonflat";
    case CellLabel::Extended: return "Extended";
    case CellLabel::Boundary: return "Boundary";
    case CellLabel::Unresolved: return "Unresolved";
  }
  return "?";
}

namespace {

std::array<int, 4> unflatten(const BlockGrid& bg, int n, int local) {
  std::array<int, 4> idx{};
  for (int a = n - 1; a >= 0; --a) {
    idx[a] = local % bg.count[a];
    local /= bg.count[a];
  }
  return idx;
}

int flatten(const BlockGrid& bg, int n, const std::array<int, 4>& idx) {
  int local = 0;
  for (int a = 0; a < n; ++a) local = local * bg.count[a] + idx[a];
  return local;
}

int intern_map(std::vector<EdgeMap>& maps, const Mat& A, const Vec& b) {
  for (std::size_t i = 0; i < maps.size(); ++i)
    if ((maps[i].A - A).cwiseAbs().maxCoeff() < 1e-12 && (maps[i].b - b).cwiseAbs().maxCoeff() < 1e-9)
      return static_cast<int>(i);
  maps.push_back({A, b});
  return static_cast<int>(maps.size()) - 1;
}

void sample_range(const Atlas& atlas, GridSample& s, const CurvatureOptions& copt, int begin, int end, int& notcn2) {
  const int n = s.n;
  for (int c = begin; c < end; ++c) {
    Cell& cell = s.cells[c];
    const auto& field = *atlas.blocks[cell.block].field;
    const BlockGrid& bg = s.blocks[cell.block];
    Vec x = s.center(c);
    MetricJet jet = field.jet(x, 2, atlas.fd);
    double dv = 1.0;
    for (int a = 0; a < n; ++a) dv *= bg.width[a];
    bool d2zero = true;
    if (jet.first_derivatives_zero()) {
      for (int a = 0; a < n && d2zero; ++a)
        for (int b = 0; b < n && d2zero; ++b)
          if (jet.d2g[a][b].cwiseAbs().maxCoeff() != 0.0) d2zero = false;
    } else {
      d2zero = false;
    }
    if (d2zero) {
      check_positive_definite(jet.g);
      cell.volume = std::sqrt(jet.g.determinant()) * dv;
      cell.mu = static_cast<std::int8_t>(n);
      continue;
    }
    CurvatureReport r = curvature_from_jet(jet, x, copt);
    cell.volume = std::sqrt(r.g.determinant()) * dv;
    cell.scal = r.scal;
    cell.norm = r.norm;
    cell.mu = static_cast<std::int8_t>(r.mu);
    double gmax = 0.0;
    for (int i = 0; i < n * n * n; ++i) gmax = std::max(gmax, std::abs(r.christoffel.gamma[i]));
    cell.conn_zero = gmax * s.h < 1e-15;
    PointClass pc = r.classify(copt);
    if (pc == PointClass::Flat) continue;
    if (pc == PointClass::NotCN2) {
      notcn2 = c;
      return;
    }
    cell.flat = false;
    for (int j = 0; j < s.k; ++j)
      for (int i = 0; i < n; ++i) cell.plane[j * n + i] = r.nullity_basis(i, j);
  }
}

}  // namespace

Vec GridSample::center(int c) const {
  const Cell& cell = cells[c];
  const BlockGrid& bg = blocks[cell.block];
  const ChartSpec& ch = atlas->chart(cell.block);
  auto idx = unflatten(bg, n, cell.local);
  Vec x(n);
  for (int a = 0; a < n; ++a) x[a] = ch.lo[a] + (idx[a] + 0.5) * bg.width[a];
  return x;
}

Mat GridSample::plane(int c) const {
  Mat P(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) P(i, j) = cells[c].plane[j * n + i];
  return P;
}

Vec GridSample::neighbor_center(int, const Neighbor& nb) const {
  Vec y = center(nb.cell);
  if (nb.map < 0) return y;
  const EdgeMap& m = maps[nb.map];
  return m.A.transpose() * (y - m.b);  // A is a signed permutation
}

GridSample sample_grid(const Atlas& atlas, const GridOptions& opt) {
  if (!(opt.h > 0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  GridSample s;
  s.atlas = std::make_shared<const Atlas>(atlas);
  s.n = atlas.dim;
  s.k = std::max(0, s.n - 2);
  s.h = opt.h;
  const int n = s.n;
  long long total = 0;
  for (std::size_t b = 0; b < atlas.blocks.size(); ++b) {
    const ChartSpec& ch = atlas.chart(static_cast<int>(b));
    BlockGrid bg;
    bg.first = static_cast<int>(total);
    bg.cells = 1;
    for (int a = 0; a < n; ++a) {
      double w = ch.width(a);
      long long cnt = std::llround(w / opt.h);
      if (opt.min_cells > 0) {
        cnt = std::max<long long>(cnt, opt.min_cells);
      } else if (std::abs(cnt * opt.h - w) > 1e-9 * w) {
        throw Error(ErrorCode::InvalidArgument, "grid spacing does not divide the width of block '" +
                                                    atlas.blocks[b].name + "'");
      }
      if (cnt < 2) throw Error(ErrorCode::ResolutionTooCoarse, "fewer than two cells across a block axis");
      if (cnt > 4096) throw Error(ErrorCode::InvalidArgument, "grid too fine");
      bg.count[a] = static_cast<int>(cnt);
      bg.width[a] = w / cnt;
      bg.cells *= bg.count[a];
    }
    total += bg.cells;
    if (total > 50'000'000) throw Error(ErrorCode::InvalidArgument, "grid has too many cells");
    s.blocks.push_back(bg);
  }
  s.cells.resize(total);
  for (std::size_t b = 0; b < s.blocks.size(); ++b)
    for (int l = 0; l < s.blocks[b].cells; ++l) {
      Cell& c = s.cells[s.blocks[b].first + l];
      c.block = static_cast<int>(b);
      c.local = l;
    }

  const int N = static_cast<int>(total);
  int threads = std::max(1, std::min(opt.threads, 64));
  std::vector<int> first_bad(threads, -1);
  std::vector<std::exception_ptr> errors(threads);
  auto run = [&](int t) {
    int begin = static_cast<int>(static_cast<long long>(N) * t / threads);
    int end = static_cast<int>(static_cast<long long>(N) * (t + 1) / threads);
    try {
      sample_range(atlas, s, opt.curvature, begin, end, first_bad[t]);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(run, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (int t = 0; t < threads; ++t)
    if (first_bad[t] >= 0) {
      s.notcn2_cell = first_bad[t];
      return s;
    }

  // adjacency
  s.nbr.assign(static_cast<std::size_t>(N) * 2 * n, Neighbor{});
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const BlockGrid& bg = s.blocks[b];
    const ChartSpec& ch = atlas.chart(static_cast<int>(b));
    for (int l = 0; l < bg.cells; ++l) {
      const int c = bg.first + l;
      auto idx = unflatten(bg, n, l);
      for (int a = 0; a < n; ++a)
        for (int side = 0; side < 2; ++side) {
          Neighbor& nb = s.nbr[static_cast<std::size_t>(c) * 2 * n + a * 2 + side];
          auto j = idx;
          j[a] += side ? 1 : -1;
          if (j[a] >= 0 && j[a] < bg.count[a]) {
            nb.cell = bg.first + flatten(bg, n, j);
            continue;
          }
          Vec x = s.center(c);
          double face = side ? ch.hi[a] : ch.lo[a];
          x[a] = face + (side ? 1.0 : -1.0) * 1e-7 * bg.width[a];
          Located L;
          try {
            L = atlas.locate(static_cast<int>(b), x);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::LeftDomain) continue;
            throw;
          }
          const BlockGrid& tg = s.blocks[L.block];
          const ChartSpec& tc = atlas.chart(L.block);
          std::array<int, 4> t{};
          for (int q = 0; q < n; ++q) {
            int v = static_cast<int>(std::floor((L.x[q] - tc.lo[q]) / tg.width[q]));
            t[q] = std::clamp(v, 0, tg.count[q] - 1);
          }
          nb.cell = tg.first + flatten(tg, n, t);
          if (L.crossings > 0) nb.map = intern_map(s.maps, L.A, L.b);
        }
    }
  }
  return s;
}

Components nonflat_components(const GridSample& s) {
  const int N = static_cast<int>(s.cells.size());
  std::vector<int> parent(N);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int c = 0; c < N; ++c) {
    if (s.cells[c].flat) continue;
    for (int q = 0; q < 2 * s.n; ++q) {
      int d = s.nbr[static_cast<std::size_t>(c) * 2 * s.n + q].cell;
      if (d < 0 || s.cells[d].flat) continue;
      int a = find(c), b = find(d);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  Components out;
  out.id.assign(N, -1);
  std::vector<int> root_id(N, -1);
  for (int c = 0; c < N; ++c) {
    if (s.cells[c].flat) continue;
    int r = find(c);
    if (root_id[r] < 0) root_id[r] = out.count++;
    out.id[c] = root_id[r];
  }
  return out;
}

Mat transport_edge(const GridSample& s, int from, const Neighbor& nb, const Mat& plane) {
  Mat V = plane;
  if (!(s.cells[from].conn_zero && s.cells[nb.cell].conn_zero)) {
    const Atlas& atlas = *s.atlas;
    const int blk = s.cells[from].block;
    Vec x0 = s.center(from);
    Vec x1 = s.neighbor_center(from, nb);
    Vec dx = x1 - x0;
    Connection g0 = christoffel(atlas.jet(blk, x0, 1));
    Connection gm = christoffel(atlas.jet(blk, Vec(0.5 * (x0 + x1)), 1));
    Connection g1 = christoffel(atlas.jet(blk, x1, 1));
    for (int j = 0; j < V.cols(); ++j) {
      Vec v = V.col(j);
      Vec k1 = -g0.apply(dx, v);
      Vec k2 = -gm.apply(dx, Vec(v + 0.5 * k1));
      Vec k3 = -gm.apply(dx, Vec(v + 0.5 * k2));
      Vec k4 = -g1.apply(dx, Vec(v + k3));
      V.col(j) = v + (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    }
  }
  if (nb.map >= 0) V = s.maps[nb.map].A * V;
  return V;
}

double plane_angle(const GridSample& s, int cell, const Mat& a, const Mat& b) {
  if (a.cols() == 0) return 0.0;
  Mat g = s.atlas->blocks[s.cells[cell].block].field->value(s.center(cell));
  if (a.cols() == 1) {
    double t = vector_angle(g, a.col(0), b.col(0));
    return std::min(t, M_PI - t);
  }
  return principal_angles(g, a, b).front();
}

std::vector<double> cylinder_residuals(const GridSample& s, const Components& comps) {
  std::vector<double> res(comps.count, 0.0);
  const int N = static_cast<int>(s.cells.size());
  for (int c = 0; c < N; ++c) {
    if (s.cells[c].flat) continue;
    Mat P = s.plane(c);
    for (int q = 0; q < 2 * s.n; ++q) {
      const Neighbor& nb = s.nbr[static_cast<std::size_t>(c) * 2 * s.n + q];
      if (nb.cell <= c || s.cells[nb.cell].flat) continue;
      Mat T = transport_edge(s, c, nb, P);
      double a = plane_angle(s, nb.cell, T, s.plane(nb.cell));
      double& r = res[comps.id[c]];
      r = std::max(r, a);
    }
  }
  return res;
}

}  // namespace cn2
