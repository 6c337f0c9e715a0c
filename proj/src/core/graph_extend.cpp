#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "graph.hpp"

namespace cn2 {

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  // returns true when a merge happened; the smaller root survives
  bool unite(int a, int b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

Mat to_mat(const std::array<double, 8>& a, int n, int k) {
  Mat P(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) P(i, j) = a[j * n + i];
  return P;
}

std::array<double, 8> from_mat(const Mat& P) {
  std::array<double, 8> a{};
  const int n = static_cast<int>(P.rows());
  for (int j = 0; j < P.cols(); ++j)
    for (int i = 0; i < n; ++i) a[j * n + i] = P(i, j);
  return a;
}

/// The entry of d's neighbor list that points back at c.
const Neighbor* back_edge(const GridSample& s, int d, int c) {
  for (int q = 0; q < 2 * s.n; ++q) {
    const Neighbor& nb = s.nbr[static_cast<std::size_t>(d) * 2 * s.n + q];
    if (nb.cell == c) return &nb;
  }
  return nullptr;
}

bool labeled(CellLabel l) { return l == CellLabel::Nonflat || l == CellLabel::Extended; }

struct LeafCell {
  int cell;
  Mat plane;
};

/// Cells on the coordinate line through c along the plane direction, with the
/// plane carried through identifications. Empty when the direction is not a
/// coordinate axis to within tol.
std::vector<LeafCell> trace_leaf(const GridSample& s, int c, const Mat& P, double tol) {
  std::vector<LeafCell> out;
  if (s.k != 1) return out;
  Vec d = P.col(0);
  int a = 0;
  d.cwiseAbs().maxCoeff(&a);
  if (std::abs(d[a]) < std::cos(tol) * d.norm()) return out;
  const int N = static_cast<int>(s.cells.size());
  for (int dir = 1; dir >= 0; --dir) {
    int cur = c, ax = a, sd = dir;
    Mat M = Mat::Identity(s.n, s.n);
    for (int step = 0; step < N; ++step) {
      const Neighbor& nb = s.neighbor(cur, ax, sd);
      if (nb.cell < 0) break;
      if (nb.map >= 0) {
        const Mat& A = s.maps[nb.map].A;
        int ax2 = 0;
        A.col(ax).cwiseAbs().maxCoeff(&ax2);
        sd = (A(ax2, ax) > 0) == (sd == 1) ? 1 : 0;
        ax = ax2;
        M = A * M;
      }
      cur = nb.cell;
      if (cur == c) return out;  // closed leaf
      out.push_back({cur, M * P});
    }
  }
  return out;
}

}  // namespace

ExtensionState extend(const GridSample& s, const Components& comps, double tol_par, double tol_bnl) {
  const int N = static_cast<int>(s.cells.size());
  const int n = s.n, k = s.k;
  ExtensionState e;
  e.label.assign(N, CellLabel::Unresolved);
  e.comp.assign(N, -1);
  e.plane.assign(N, {});
  Dsu dsu(std::max(1, comps.count));
  std::vector<int> fresh;
  for (int c = 0; c < N; ++c)
    if (!s.cells[c].flat) {
      e.label[c] = CellLabel::Nonflat;
      e.comp[c] = comps.id[c];
      e.plane[c] = s.cells[c].plane;
      fresh.push_back(c);
    }
  auto merge = [&](int round, int a, int b) {
    int ra = dsu.find(a), rb = dsu.find(b);
    if (ra != rb) {
      dsu.unite(ra, rb);
      e.merges.push_back({round, std::min(ra, rb), std::max(ra, rb)});
    }
  };
  auto agree_tol = [&](int a, int b) { return dsu.find(a) == dsu.find(b) ? tol_par : tol_bnl; };

  std::vector<char> prev(N, 0);
  for (int c = 0; c < N; ++c) prev[c] = labeled(e.label[c]);
  int round = 0;
  while (!fresh.empty()) {
    ++round;
    std::vector<int> frontier;
    for (int c : fresh)
      for (int q = 0; q < 2 * n; ++q) {
        int d = s.nbr[static_cast<std::size_t>(c) * 2 * n + q].cell;
        if (d >= 0 && e.label[d] == CellLabel::Unresolved) frontier.push_back(d);
      }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    fresh.clear();
    for (int c : frontier) {
      if (e.label[c] != CellLabel::Unresolved) continue;
      struct Cand {
        int from, comp;
        Mat plane;
      };
      std::vector<Cand> cands;
      for (int q = 0; q < 2 * n; ++q) {
        int d = s.nbr[static_cast<std::size_t>(c) * 2 * n + q].cell;
        if (d < 0 || !prev[d]) continue;
        bool dup = false;
        for (auto& cd : cands) dup = dup || cd.from == d;
        if (dup) continue;
        const Neighbor* back = back_edge(s, d, c);
        if (!back) continue;
        cands.push_back({d, e.comp[d], transport_edge(s, d, *back, to_mat(e.plane[d], n, k))});
      }
      if (cands.empty()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < cands.size() && ok; ++i)
        for (std::size_t j = i + 1; j < cands.size() && ok; ++j)
          ok = plane_angle(s, c, cands[i].plane, cands[j].plane) <= agree_tol(cands[i].comp, cands[j].comp);
      if (!ok) {
        e.label[c] = CellLabel::Boundary;
        continue;
      }
      const Cand* rep = &cands[0];
      for (auto& cd : cands)
        if (cd.from < rep->from) rep = &cd;
      std::vector<LeafCell> leaf = trace_leaf(s, c, rep->plane, tol_bnl);
      std::vector<int> joins;
      for (auto& lc : leaf) {
        CellLabel l = e.label[lc.cell];
        if (l == CellLabel::Boundary) {
          ok = false;
          break;
        }
        if (labeled(l)) {
          if (plane_angle(s, lc.cell, lc.plane, to_mat(e.plane[lc.cell], n, k)) >
              agree_tol(rep->comp, e.comp[lc.cell])) {
            ok = false;
            break;
          }
          joins.push_back(e.comp[lc.cell]);
        }
      }
      if (!ok) {
        e.label[c] = CellLabel::Boundary;
        continue;
      }
      for (auto& cd : cands) merge(round, rep->comp, cd.comp);
      for (int j : joins) merge(round, rep->comp, j);
      auto claim = [&](int cell, const Mat& P) {
        e.label[cell] = CellLabel::Extended;
        e.comp[cell] = rep->comp;
        e.plane[cell] = from_mat(P);
        fresh.push_back(cell);
      };
      claim(c, rep->plane);
      for (auto& lc : leaf)
        if (e.label[lc.cell] == CellLabel::Unresolved) claim(lc.cell, lc.plane);
    }
    for (int c : fresh) prev[c] = 1;
  }

  // Extended cells touching another component with a conflicting plane become Boundary.
  for (;;) {
    std::vector<int> flip;
    for (int c = 0; c < N; ++c) {
      if (e.label[c] != CellLabel::Extended) continue;
      for (int q = 0; q < 2 * n; ++q) {
        int d = s.nbr[static_cast<std::size_t>(c) * 2 * n + q].cell;
        if (d < 0 || !labeled(e.label[d]) || dsu.find(e.comp[d]) == dsu.find(e.comp[c])) continue;
        const Neighbor* back = back_edge(s, d, c);
        if (!back) continue;
        Mat T = transport_edge(s, d, *back, to_mat(e.plane[d], n, k));
        if (plane_angle(s, c, T, to_mat(e.plane[c], n, k)) <= tol_bnl) {
          merge(round + 1, e.comp[c], e.comp[d]);
        } else {
          flip.push_back(c);
          break;
        }
      }
    }
    if (flip.empty()) break;
    for (int c : flip) {
      e.label[c] = CellLabel::Boundary;
      e.comp[c] = -1;
    }
  }
  e.rounds = round;

  // final ids ordered by smallest member cell
  std::vector<int> final_id(std::max(1, comps.count), -1);
  for (int c = 0; c < N; ++c) {
    if (e.comp[c] < 0) continue;
    int r = dsu.find(e.comp[c]);
    if (final_id[r] < 0) final_id[r] = e.count++;
    e.comp[c] = final_id[r];
  }
  e.origin.assign(e.count, {});
  for (int i = 0; i < comps.count; ++i) {
    int r = final_id[dsu.find(i)];
    if (r >= 0) e.origin[r].push_back(i);
  }
  return e;
}

BoundaryProfile boundary_profile(const GridSample& s, const ExtensionState& e, int cell, double rho, double tol_bnl) {
  const int n = s.n, k = s.k;
  BoundaryProfile bp;
  bp.cell = cell;
  bp.rho = rho;
  struct Reach {
    double dist;
    Mat M;  // tangent map from the start cell's coordinates
  };
  std::vector<std::pair<int, Reach>> reached;
  std::unordered_map<int, Reach> best;
  std::unordered_set<int> done;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  best[cell] = {0.0, Mat::Identity(n, n)};
  pq.push({0.0, cell});
  const double eps = 1e-9 * rho;
  while (!pq.empty()) {
    auto [d, c] = pq.top();
    pq.pop();
    if (!done.insert(c).second) continue;
    Reach here = best.at(c);
    reached.push_back({c, here});
    Vec xc = s.center(c);
    for (int q = 0; q < 2 * n; ++q) {
      const Neighbor& nb = s.nbr[static_cast<std::size_t>(c) * 2 * n + q];
      if (nb.cell < 0 || done.count(nb.cell)) continue;
      double nd = d + (s.neighbor_center(c, nb) - xc).norm();
      if (nd > rho + eps) continue;
      auto it = best.find(nb.cell);
      if (it != best.end() && it->second.dist <= nd) continue;
      Mat M = nb.map >= 0 ? Mat(s.maps[nb.map].A * here.M) : here.M;
      best[nb.cell] = {nd, M};
      pq.push({nd, nb.cell});
    }
  }
  // nearest cell per component
  std::vector<std::pair<int, std::pair<double, int>>> nearest;  // comp -> (dist, cell)
  std::vector<int> half;
  for (auto& [c, r] : reached) {
    int id = e.comp[c];
    if (id < 0) continue;
    if (r.dist <= rho / 2 + eps && std::find(half.begin(), half.end(), id) == half.end()) half.push_back(id);
    auto it = std::find_if(nearest.begin(), nearest.end(), [&](auto& p) { return p.first == id; });
    if (it == nearest.end()) {
      nearest.push_back({id, {r.dist, c}});
    } else if (std::make_pair(r.dist, c) < it->second) {
      it->second = {r.dist, c};
    }
  }
  std::sort(nearest.begin(), nearest.end());
  bp.m = static_cast<int>(nearest.size());
  bp.m_half = static_cast<int>(half.size());
  for (auto& p : nearest) bp.comps.push_back(p.first);

  std::vector<Mat> reps;
  for (auto& [id, dc] : nearest) {
    Mat P = best.at(dc.second).M.transpose() * to_mat(e.plane[dc.second], n, k);
    bool placed = false;
    for (auto& R : reps)
      if (plane_angle(s, cell, R, P) <= tol_bnl) {
        placed = true;
        break;
      }
    if (!placed) {
      reps.push_back(P);
      bp.representatives.push_back(id);
    }
  }
  bp.clusters = static_cast<int>(reps.size());
  bp.angles.assign(reps.size() * reps.size(), 0.0);
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = i + 1; j < reps.size(); ++j)
      bp.angles[i * reps.size() + j] = bp.angles[j * reps.size() + i] = plane_angle(s, cell, reps[i], reps[j]);
  bp.pass = bp.clusters >= 2 && bp.clusters <= bp.m;
  return bp;
}

std::vector<SeparatingSurface> detect_surfaces(const GridSample& s, const ExtensionState& e, double tau_flat) {
  const int N = static_cast<int>(s.cells.size());
  const int n = s.n;
  std::vector<int> sheet(N, -1);
  std::vector<SeparatingSurface> out;
  for (int c0 = 0; c0 < N; ++c0) {
    if (e.label[c0] != CellLabel::Boundary || sheet[c0] >= 0) continue;
    const int id = static_cast<int>(out.size());
    SeparatingSurface sf;
    std::vector<int> stack = {c0};
    sheet[c0] = id;
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      sf.cells.push_back(c);
      sf.flatness = std::max(sf.flatness, s.cells[c].norm);
      for (int q = 0; q < 2 * n; ++q) {
        int d = s.nbr[static_cast<std::size_t>(c) * 2 * n + q].cell;
        if (d < 0) {
          sf.closed = false;
          continue;
        }
        if (e.label[d] == CellLabel::Boundary) {
          if (sheet[d] < 0) {
            sheet[d] = id;
            stack.push_back(d);
          }
        } else {
          sf.sides.push_back(e.comp[d] >= 0 ? e.comp[d] : -2);
        }
      }
    }
    std::sort(sf.cells.begin(), sf.cells.end());
    std::sort(sf.sides.begin(), sf.sides.end());
    sf.sides.erase(std::unique(sf.sides.begin(), sf.sides.end()), sf.sides.end());
    sf.accepted = sf.flatness <= tau_flat && sf.closed && sf.sides.size() == 2 && sf.sides[0] >= 0;
    out.push_back(std::move(sf));
  }
  // thickness: per cell the shortest in-sheet run over the axes, maximized over the sheet
  for (std::size_t id = 0; id < out.size(); ++id) {
    int best = 0;
    for (int c : out[id].cells) {
      int shortest = std::numeric_limits<int>::max();
      for (int a = 0; a < n; ++a) {
        int run = 1;
        for (int side = 0; side < 2; ++side) {
          int cur = c;
          for (int step = 0; step < N; ++step) {
            int d = s.neighbor(cur, a, side).cell;
            if (d < 0 || d == c || sheet[d] != static_cast<int>(id)) break;
            ++run;
            cur = d;
            if (run > shortest) break;
          }
          if (run > shortest) break;
        }
        shortest = std::min(shortest, run);
      }
      best = std::max(best, shortest);
    }
    out[id].thickness = best;
  }
  return out;
}

}  // namespace cn2
