#include "metric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cn2 {

bool MetricJet::first_derivatives_zero() const {
  for (int k = 0; k < n; ++k)
    if (!(dg[k].array() == 0.0).all()) return false;
  return true;
}

ChartSpec ChartSpec::box(std::vector<std::string> coords, const std::vector<double>& lo,
                         const std::vector<double>& hi, std::array<bool, 4> periodic) {
  ChartSpec c;
  c.n = static_cast<int>(coords.size());
  c.coords = std::move(coords);
  c.lo = Vec::Map(lo.data(), c.n);
  c.hi = Vec::Map(hi.data(), c.n);
  c.periodic = periodic;
  for (int a = 0; a < c.n; ++a)
    if (!(c.hi[a] > c.lo[a])) throw Error(ErrorCode::BadParams, "degenerate interval on axis " + c.coords[a]);
  return c;
}

std::vector<std::string> default_coords(int n) {
  static const char* names[] = {"x", "y", "z", "w"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.emplace_back(names[i]);
  return out;
}

namespace {

MetricJet zero_jet(int n) {
  MetricJet j;
  j.n = n;
  j.g = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    j.dg[k] = Mat::Zero(n, n);
    for (int l = 0; l < n; ++l) j.d2g[k][l] = Mat::Zero(n, n);
  }
  return j;
}

}  // namespace

std::shared_ptr<MetricField> MetricField::from_exprs(ChartSpec chart, std::vector<expr::Expr> comps,
                                                     std::string label) {
  const int n = chart.n;
  if (n < 2 || n > 4) throw Error(ErrorCode::DimensionMismatch, "dimension must be 2, 3 or 4");
  if (static_cast<int>(comps.size()) != n * n) throw Error(ErrorCode::DimensionMismatch, "need n*n components");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto& a = comps[i * n + j];
      auto& b = comps[j * n + i];
      if (a && b && a != b && !expr::structurally_equal(a, b))
        throw Error(ErrorCode::BadParams, "metric components g" + std::to_string(i + 1) + std::to_string(j + 1) +
                                              " and g" + std::to_string(j + 1) + std::to_string(i + 1) + " differ");
      if (!a) a = b;
      if (!b) b = a;
    }
  auto f = std::make_shared<MetricField>();
  f->chart_ = std::move(chart);
  f->comps_ = std::move(comps);
  f->label_ = std::move(label);
  return f;
}

std::shared_ptr<MetricField> MetricField::from_function(ChartSpec chart, JetFunction fn, std::string label) {
  if (chart.n < 2 || chart.n > 4) throw Error(ErrorCode::DimensionMismatch, "dimension must be 2, 3 or 4");
  auto f = std::make_shared<MetricField>();
  f->chart_ = std::move(chart);
  f->comps_.assign(f->chart_.n * f->chart_.n, nullptr);
  f->fn_ = std::move(fn);
  f->label_ = std::move(label);
  return f;
}

Mat MetricField::value(const Vec& p) const {
  const int n = chart_.n;
  if (fn_) return fn_(p, 0).g;
  Mat g(n, n);
  std::span<const double> pt(p.data(), n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const auto& c = comps_[i * n + j];
      double v = c ? expr::eval(c, pt) : (i == j ? 1.0 : 0.0);
      g(i, j) = g(j, i) = v;
    }
  return g;
}

MetricJet MetricField::jet(const Vec& p, int order, bool fd) const {
  const int n = chart_.n;
  if (fd && order > 0) {
    // Central differences of values: step 1e-4 for first, 1e-3 for second derivatives.
    MetricJet j = zero_jet(n);
    j.g = value(p);
    const double h1 = 1e-4, h2 = 1e-3;
    for (int k = 0; k < n; ++k) {
      Vec a = p, b = p;
      a[k] += h1;
      b[k] -= h1;
      j.dg[k] = (value(a) - value(b)) / (2 * h1);
    }
    if (order >= 2) {
      for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
          Mat d;
          if (k == l) {
            Vec a = p, b = p;
            a[k] += h2;
            b[k] -= h2;
            d = (value(a) - 2.0 * j.g + value(b)) / (h2 * h2);
          } else {
            Vec pp = p, pm = p, mp = p, mm = p;
            pp[k] += h2, pp[l] += h2;
            pm[k] += h2, pm[l] -= h2;
            mp[k] -= h2, mp[l] += h2;
            mm[k] -= h2, mm[l] -= h2;
            d = (value(pp) - value(pm) - value(mp) + value(mm)) / (4 * h2 * h2);
          }
          j.d2g[k][l] = d;
          j.d2g[l][k] = d;
        }
    }
    return j;
  }
  if (fn_) return fn_(p, order);
  MetricJet j = zero_jet(n);
  if (order == 0) {
    j.g = value(p);
    return j;
  }
  std::span<const double> pt(p.data(), n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      const auto& c = comps_[a * n + b];
      if (!c) {
        j.g(a, b) = j.g(b, a) = (a == b ? 1.0 : 0.0);
        continue;
      }
      if (c->kind == expr::NodeKind::Constant) {
        j.g(a, b) = j.g(b, a) = c->value;
        continue;
      }
      expr::Jet2 v = expr::eval_jet2(c, n, pt);
      j.g(a, b) = j.g(b, a) = v.value;
      for (int k = 0; k < n; ++k) {
        j.dg[k](a, b) = j.dg[k](b, a) = v.grad[k];
        for (int l = 0; l < n; ++l) j.d2g[k][l](a, b) = j.d2g[k][l](b, a) = v.h(k, l);
      }
    }
  return j;
}

Vec MetricField::wrap(const Vec& p) const {
  Vec q = p;
  for (int a = 0; a < chart_.n; ++a) {
    if (!chart_.periodic[a]) continue;
    double w = chart_.width(a);
    double r = std::fmod(q[a] - chart_.lo[a], w);
    if (r < 0) r += w;
    q[a] = chart_.lo[a] + r;
  }
  return q;
}

bool MetricField::contains(const Vec& p, double tol) const {
  for (int a = 0; a < chart_.n; ++a) {
    double t = tol * std::max(1.0, chart_.width(a));
    if (p[a] < chart_.lo[a] - t || p[a] > chart_.hi[a] + t) return false;
  }
  return true;
}

Mat MetricField::metric_at(const Vec& p) const {
  if (p.size() != chart_.n)
    throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(p.size()) + " coordinates, chart has " +
                                                  std::to_string(chart_.n));
  Vec q = wrap(p);
  if (!contains(q)) throw Error(ErrorCode::OutOfDomain, "point outside the chart domain");
  Mat g = value(q);
  check_positive_definite(g);
  return g;
}

void check_positive_definite(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() == Eigen::Success) return;
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  std::ostringstream os;
  os.precision(17);
  os << "metric not positive definite (smallest eigenvalue " << es.eigenvalues()[0] << ")";
  throw Error(ErrorCode::NotPositiveDefinite, os.str());
}

// ---------------------------------------------------------------------------

Atlas Atlas::from_field(std::shared_ptr<const MetricField> field) {
  Atlas at;
  at.dim = field->dim();
  at.label = field->label();
  const ChartSpec& c = field->chart();
  at.blocks.push_back({field, Vec::Zero(at.dim), field->label(), -1});
  double m = 1e300;
  for (int a = 0; a < at.dim; ++a) m = std::min(m, c.width(a) / 2);
  at.margin = m;
  for (int a = 0; a < at.dim; ++a) {
    if (!c.periodic[a]) continue;
    Vec shift = Vec::Zero(at.dim);
    shift[a] = -c.width(a);
    at.add_glue({0, a, 1}, {0, a, 0}, {0, 1, 2, 3}, {1, 1, 1, 1}, shift);
  }
  return at;
}

int Atlas::add_glue(FaceRef from, FaceRef to, const std::array<int, 4>& perm, const std::array<int, 4>& flip,
                    const Vec& shift, const Vec* patch_lo, const Vec* patch_hi) {
  const int n = dim;
  Glue fwd;
  fwd.from = from;
  fwd.to = to;
  fwd.A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (perm[i] < 0 || perm[i] >= n) throw Error(ErrorCode::BadParams, "glue permutation index out of range");
    fwd.A(i, perm[i]) = flip[i] < 0 ? -1.0 : 1.0;
  }
  if (std::abs(std::abs(fwd.A.determinant()) - 1.0) > 1e-12)
    throw Error(ErrorCode::BadParams, "glue map is not a permutation");
  if (std::abs(fwd.A(to.axis, from.axis)) != 1.0)
    throw Error(ErrorCode::BadParams, "glue map does not send the face normal to the target face normal");
  fwd.shift = shift;
  Glue rev;
  rev.from = to;
  rev.to = from;
  rev.A = fwd.A.transpose();
  rev.shift = -(rev.A * shift);
  if (patch_lo && patch_hi) {
    fwd.has_patch = rev.has_patch = true;
    fwd.patch_lo = *patch_lo;
    fwd.patch_hi = *patch_hi;
    Vec a = fwd.A * *patch_lo + shift, b = fwd.A * *patch_hi + shift;
    rev.patch_lo = a.cwiseMin(b);
    rev.patch_hi = a.cwiseMax(b);
  }
  int idx = static_cast<int>(glues.size());
  fwd.inverse = idx + 1;
  rev.inverse = idx;
  glues.push_back(fwd);
  glues.push_back(rev);
  face_glues_.resize(blocks.size() * 8);
  face_glues_[from.block * 8 + from.axis * 2 + from.side].push_back(idx);
  face_glues_[to.block * 8 + to.axis * 2 + to.side].push_back(idx + 1);
  return idx;
}

void Atlas::glue_by_placement(const Vec& global_lo, const Vec& global_hi) {
  const int n = dim;
  const Vec L = global_hi - global_lo;
  const double tol = 1e-9;
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
    const ChartSpec& cb = chart(b);
    for (int a = 0; a < n; ++a) {
      double f = cb.hi[a];
      for (int c = 0; c < static_cast<int>(blocks.size()); ++c) {
        const ChartSpec& cc = chart(c);
        double diff = cc.lo[a] - f;
        double k = std::round(diff / L[a]);
        if (std::abs(diff - k * L[a]) > tol) continue;
        Vec lo = cb.lo, hi = cb.hi;
        bool overlap = true;
        for (int e = 0; e < n && overlap; ++e) {
          if (e == a) continue;
          lo[e] = std::max(cb.lo[e], cc.lo[e]);
          hi[e] = std::min(cb.hi[e], cc.hi[e]);
          overlap = hi[e] - lo[e] > tol;
        }
        if (!overlap) continue;
        lo[a] = hi[a] = f;
        Vec shift = Vec::Zero(n);
        shift[a] = diff;
        bool full = true;
        for (int e = 0; e < n; ++e)
          if (e != a && (std::abs(lo[e] - cb.lo[e]) > tol || std::abs(hi[e] - cb.hi[e]) > tol)) full = false;
        if (full) {
          add_glue({b, a, 1}, {c, a, 0}, {0, 1, 2, 3}, {1, 1, 1, 1}, shift);
        } else {
          add_glue({b, a, 1}, {c, a, 0}, {0, 1, 2, 3}, {1, 1, 1, 1}, shift, &lo, &hi);
        }
      }
    }
  }
}

const Glue* Atlas::find_glue(int block, int axis, int side, const Vec& x) const {
  std::size_t key = static_cast<std::size_t>(block) * 8 + axis * 2 + side;
  if (key >= face_glues_.size()) return nullptr;
  const ChartSpec& c = chart(block);
  for (int gi : face_glues_[key]) {
    const Glue& g = glues[gi];
    if (!g.has_patch) return &g;
    bool inside = true;
    for (int e = 0; e < dim && inside; ++e) {
      if (e == axis) continue;
      double v = std::clamp(x[e], c.lo[e], c.hi[e]);
      double t = 1e-12 * std::max(1.0, c.width(e));
      inside = v >= g.patch_lo[e] - t && v <= g.patch_hi[e] + t;
    }
    if (inside) return &g;
  }
  return nullptr;
}

Located Atlas::locate(int block, const Vec& x) const {
  Located L;
  L.block = block;
  L.x = x;
  L.A = Mat::Identity(dim, dim);
  L.b = Vec::Zero(dim);
  for (int iter = 0; iter < 100000; ++iter) {
    const ChartSpec& c = chart(L.block);
    int axis = -1, side = 0;
    double worst = 0.0;
    for (int a = 0; a < dim; ++a) {
      double t = 1e-12 * std::max(1.0, c.width(a));
      double below = c.lo[a] - t - L.x[a];
      double above = L.x[a] - c.hi[a] - t;
      if (below > worst) worst = below, axis = a, side = 0;
      if (above > worst) worst = above, axis = a, side = 1;
    }
    if (axis < 0) return L;
    const Glue* g = find_glue(L.block, axis, side, L.x);
    if (!g) throw Error(ErrorCode::LeftDomain, "point left the domain through an unglued face");
    L.x = g->A * L.x + g->shift;
    L.A = g->A * L.A;
    L.b = g->A * L.b + g->shift;
    L.block = g->to.block;
    ++L.crossings;
  }
  throw Error(ErrorCode::Lost, "point could not be located");
}

Located Atlas::canonicalize(int block, const Vec& x) const {
  const ChartSpec& c = chart(block);
  for (int a = 0; a < dim; ++a) {
    double w = c.width(a);
    if (x[a] < c.lo[a] - w || x[a] > c.hi[a] + w)
      throw Error(ErrorCode::Lost, "point is more than one face crossing outside its block");
  }
  try {
    return locate(block, x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LeftDomain) throw Error(ErrorCode::OutOfDomain, e.what());
    throw;
  }
}

MetricJet Atlas::jet(int block, const Vec& x, int order) const {
  Located L = locate(block, x);
  MetricJet j = blocks[L.block].field->jet(L.x, order, fd);
  if (L.A.isIdentity(0.0)) return j;
  const int n = dim;
  const Mat& A = L.A;
  MetricJet out;
  out.n = n;
  out.g = A.transpose() * j.g * A;
  if (order >= 1) {
    std::array<Mat, 4> dg;
    for (int c = 0; c < n; ++c) dg[c] = A.transpose() * j.dg[c] * A;
    for (int k = 0; k < n; ++k) {
      out.dg[k] = Mat::Zero(n, n);
      for (int c = 0; c < n; ++c)
        if (A(c, k) != 0.0) out.dg[k] += A(c, k) * dg[c];
    }
  }
  if (order >= 2) {
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        out.d2g[k][l] = Mat::Zero(n, n);
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d)
            if (A(c, k) != 0.0 && A(d, l) != 0.0)
              out.d2g[k][l] += A(c, k) * A(d, l) * (A.transpose() * j.d2g[c][d] * A);
      }
  }
  return out;
}

Mat Atlas::metric_at(int block, const Vec& x) const {
  if (x.size() != dim) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the atlas");
  Located L;
  try {
    L = locate(block, x);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LeftDomain) throw Error(ErrorCode::OutOfDomain, e.what());
    throw;
  }
  Mat g = blocks[L.block].field->value(L.x);
  check_positive_definite(g);
  return L.A.transpose() * g * L.A;
}

}  // namespace cn2
