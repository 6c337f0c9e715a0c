#include "flows.hpp"

#include "splitting.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cn2 {

namespace {

using Eigen::VectorXd;

double step_cap(const Atlas& atlas, const FlowOptions& opt) {
  return opt.h_max > 0 ? opt.h_max : 0.5 * atlas.margin;
}

OdeOptions ode_options(const Atlas& atlas, const FlowOptions& opt) {
  OdeOptions o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.h_max = step_cap(atlas, opt);
  o.h_initial = std::min(1e-2, o.h_max);
  return o;
}

double gnorm(const Mat& g, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(g * v))); }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// State layout: x (n), v (n), then k transported vectors (n each).
void geodesic_rhs(const Atlas& atlas, int block, int n, int k, const VectorXd& y, VectorXd& dy) {
  Vec x = y.head(n), v = y.segment(n, n);
  MetricJet jet = atlas.jet(block, x, 1);
  Connection G = christoffel(jet);
  dy.resize(y.size());
  dy.head(n) = v;
  dy.segment(n, n) = -G.apply(v, v);
  for (int i = 0; i < k; ++i) {
    Vec w = y.segment(2 * n + i * n, n);
    dy.segment(2 * n + i * n, n) = -G.apply(v, w);
  }
}

GeodesicPath run_geodesic(const Atlas& atlas, int block, const Vec& p, const Vec& v, double t_max,
                          const Mat* vectors, const FlowOptions& opt) {
  const int n = atlas.dim;
  if (p.size() != n || v.size() != n) throw Error(ErrorCode::DimensionMismatch, "point or velocity has wrong dimension");
  Mat g0 = atlas.metric_at(block, p);
  if (!(gnorm(g0, v) > 0)) throw Error(ErrorCode::InvalidArgument, "initial velocity must be nonzero");
  const int k = vectors ? static_cast<int>(vectors->cols()) : 0;
  VectorXd y0(2 * n + k * n);
  y0.head(n) = p;
  y0.segment(n, n) = v;
  for (int i = 0; i < k; ++i) y0.segment(2 * n + i * n, n) = vectors->col(i);
  GeodesicPath path;
  path.home_block = block;
  path.tolerance = opt.rtol;
  auto f = [&](double, const VectorXd& y, VectorXd& dy) { geodesic_rhs(atlas, block, n, k, y, dy); };
  try {
    integrate_dopri5(f, 0.0, y0, t_max, ode_options(atlas, opt), path.raw);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LeftDomain || path.raw.empty()) throw;
    path.complete = false;
    path.stop_reason = error_code_name(e.code());
  }
  for (const OdeSample& s : path.raw) {
    PathSample ps;
    ps.t = s.t;
    ps.x_raw = s.y.head(n);
    ps.v_raw = s.y.segment(n, n);
    Located L = atlas.locate(block, ps.x_raw);
    ps.block = L.block;
    ps.x = L.x;
    ps.v = L.A * ps.v_raw;
    path.samples.push_back(ps);
  }
  return path;
}

}  // namespace

void GeodesicPath::at(double t, Vec& x, Vec& v) const {
  VectorXd y = interpolate(raw, t);
  const Eigen::Index n = samples.empty() ? 0 : samples.front().x.size();
  x = y.head(n);
  v = y.segment(n, n);
}

std::string GeodesicPath::to_csv() const {
  std::ostringstream os;
  const int n = samples.empty() ? 0 : static_cast<int>(samples.front().x.size());
  os << "t,block";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",v" << i;
  os << "\n";
  for (const PathSample& s : samples) {
    os << fmt(s.t) << "," << s.block;
    for (int i = 0; i < n; ++i) os << "," << fmt(s.x[i]);
    for (int i = 0; i < n; ++i) os << "," << fmt(s.v[i]);
    os << "\n";
  }
  return os.str();
}

GeodesicPath integrate_geodesic(const Atlas& atlas, int block, const Vec& p, const Vec& v, double t_max,
                                const FlowOptions& opt) {
  return run_geodesic(atlas, block, p, v, t_max, nullptr, opt);
}

TransportResult transport_geodesic(const Atlas& atlas, int block, const Vec& p, const Vec& v, double t_max,
                                   const Mat& vectors, const FlowOptions& opt) {
  TransportResult r;
  r.path = run_geodesic(atlas, block, p, v, t_max, &vectors, opt);
  const int n = atlas.dim;
  const VectorXd& y = r.path.raw.back().y;
  r.transported.resize(n, vectors.cols());
  for (int i = 0; i < vectors.cols(); ++i) r.transported.col(i) = y.segment(2 * n + i * n, n);
  return r;
}

Mat transport_polyline(const Atlas& atlas, int block, const std::vector<Vec>& vertices, const Mat& vectors,
                       const FlowOptions& opt) {
  const int n = atlas.dim;
  const int k = static_cast<int>(vectors.cols());
  VectorXd w(n * k);
  for (int i = 0; i < k; ++i) w.segment(i * n, n) = vectors.col(i);
  OdeOptions o = ode_options(atlas, opt);
  for (std::size_t leg = 0; leg + 1 < vertices.size(); ++leg) {
    const Vec a = vertices[leg], b = vertices[leg + 1];
    const Vec d = b - a;
    double len = d.norm();
    if (len == 0.0) continue;
    OdeOptions lo = o;
    lo.h_max = std::min(1.0, o.h_max / len);
    lo.h_initial = std::min(lo.h_initial, lo.h_max);
    auto f = [&](double s, const VectorXd& y, VectorXd& dy) {
      Vec x = a + s * d;
      Connection G = christoffel(atlas.jet(block, x, 1));
      dy.resize(y.size());
      for (int i = 0; i < k; ++i) dy.segment(i * n, n) = -G.apply(d, Vec(y.segment(i * n, n)));
    };
    std::vector<OdeSample> out;
    integrate_dopri5(f, 0.0, w, 1.0, lo, out);
    w = out.back().y;
  }
  Mat result(n, k);
  for (int i = 0; i < k; ++i) result.col(i) = w.segment(i * n, n);
  return result;
}

Mat orthonormalize(const Mat& g, const Mat& basis) {
  Mat q = basis;
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < q.cols(); ++i) {
      for (int j = 0; j < i; ++j) q.col(i) -= q.col(j).dot(g * q.col(i)) * q.col(j);
      double nrm = gnorm(g, q.col(i));
      if (!(nrm > 0)) throw Error(ErrorCode::DegenerateFrame, "linearly dependent basis");
      q.col(i) /= nrm;
    }
  return q;
}

std::vector<double> principal_angles(const Mat& g, const Mat& A, const Mat& B) {
  if (A.cols() != B.cols() || A.rows() != B.rows())
    throw Error(ErrorCode::DimensionMismatch, "principal angles need subspaces of equal dimension");
  const int m = static_cast<int>(A.cols());
  if (m == 0) return {};
  Eigen::LLT<Mat> llt(g);
  Mat Lt = llt.matrixU();
  auto onb = [&](const Mat& X) {
    Eigen::MatrixXd Y = Lt * X;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), m);
    return Q;
  };
  Eigen::MatrixXd Qa = onb(A), Qb = onb(B);
  Eigen::MatrixXd M = Qa.transpose() * Qb;
  Eigen::JacobiSVD<Eigen::MatrixXd> sc(M);
  Eigen::MatrixXd R = Qb - Qa * M;
  Eigen::JacobiSVD<Eigen::MatrixXd> ss(R);
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) {
    double s = ss.singularValues()[i];
    double c = sc.singularValues()[m - 1 - i];
    out[i] = std::atan2(s, c);
  }
  return out;
}

double vector_angle(const Mat& g, const Vec& a, const Vec& b) {
  Eigen::LLT<Mat> llt(g);
  Mat Lt = llt.matrixU();
  Vec ta = Lt * a, tb = Lt * b;
  double na2 = ta.squaredNorm();
  if (!(na2 > 0) || !(tb.squaredNorm() > 0)) throw Error(ErrorCode::InvalidArgument, "angle with a zero vector");
  double c = ta.dot(tb);
  Vec r = tb - (c / na2) * ta;
  return std::atan2(std::sqrt(na2) * r.norm(), c);
}

std::string HolonomyReport::to_json() const {
  std::ostringstream os;
  os << "{\"loop\":{\"axes\":[" << axis_u << "," << axis_v << "],\"u\":[" << fmt(u0) << "," << fmt(u1) << "],\"v\":["
     << fmt(v0) << "," << fmt(v1) << "]},\"k\":" << k << ",\"delta_raw\":" << fmt(delta_raw)
     << ",\"delta\":" << fmt(delta) << ",\"area\":" << fmt(area) << ",\"angle\":" << fmt(angle)
     << ",\"bound\":" << fmt(bound) << ",\"satisfied\":" << (satisfied ? "true" : "false") << "}";
  return os.str();
}

HolonomyReport holonomy_bound_check(const Atlas& atlas, int block, const Vec& base, int axis_u, int axis_v,
                                    double u0, double u1, double v0, double v1, const Vec& xi,
                                    const FlowOptions& opt) {
  const int n = atlas.dim;
  if (axis_u == axis_v || axis_u < 0 || axis_v < 0 || axis_u >= n || axis_v >= n)
    throw Error(ErrorCode::InvalidArgument, "holonomy slice axes must be two distinct coordinate axes");
  if (xi.size() != n) throw Error(ErrorCode::DimensionMismatch, "test vector has wrong dimension");
  HolonomyReport rep;
  rep.axis_u = axis_u;
  rep.axis_v = axis_v;
  rep.u0 = u0, rep.u1 = u1, rep.v0 = v0, rep.v1 = v1;
  rep.k = n;
  auto point = [&](double u, double v) {
    Vec p = base;
    p[axis_u] = u;
    p[axis_v] = v;
    return p;
  };

  // Curvature bound over a 32 x 32 sample of cell centers.
  const int S = 32;
  CurvatureOptions copt;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) {
      Vec p = point(u0 + (u1 - u0) * (i + 0.5) / S, v0 + (v1 - v0) * (j + 0.5) / S);
      CurvatureReport cr = analyze(atlas, block, p, copt);
      if (cr.norm == 0.0) continue;
      Vec X = Vec::Zero(n), Y = Vec::Zero(n);
      X[axis_u] = 1.0;
      Y[axis_v] = 1.0;
      Mat XY(n, 2);
      XY.col(0) = X;
      XY.col(1) = Y;
      Mat on = orthonormalize(cr.g, XY);
      rep.delta_raw = std::max(rep.delta_raw, curvature_operator_norm(cr, on.col(0), on.col(1)));
    }
  rep.delta = 1.05 * rep.delta_raw;

  // Induced area of the rectangle.
  using boost::math::quadrature::gauss_kronrod;
  auto area_element = [&](double u, double v) {
    Mat g = atlas.metric_at(block, point(u, v));
    double a = g(axis_u, axis_u), b = g(axis_u, axis_v), c = g(axis_v, axis_v);
    return std::sqrt(std::max(0.0, a * c - b * b));
  };
  auto inner = [&](double u) {
    return gauss_kronrod<double, 31>::integrate([&](double v) { return area_element(u, v); }, v0, v1, 10, 1e-13);
  };
  rep.area = std::abs(gauss_kronrod<double, 31>::integrate(inner, u0, u1, 10, 1e-13));

  std::vector<Vec> loop = {point(u0, v0), point(u1, v0), point(u1, v1), point(u0, v1), point(u0, v0)};
  Mat w(n, 1);
  w.col(0) = xi;
  Mat out = transport_polyline(atlas, block, loop, w, opt);
  Mat g = atlas.metric_at(block, point(u0, v0));
  rep.angle = vector_angle(g, xi, out.col(0));
  rep.bound = (rep.k - 1) * rep.delta * rep.area;
  rep.satisfied = rep.angle <= rep.bound + 1e-6;
  return rep;
}

JacobiReport jacobi_check(const Atlas& atlas, int block, const Vec& p, const Vec& T_dir, const Vec& J0, double t_max,
                          const CurvatureOptions& copt, const FlowOptions& opt) {
  const int n = atlas.dim;
  if (T_dir.size() != n || J0.size() != n) throw Error(ErrorCode::DimensionMismatch, "vector has wrong dimension");
  CurvatureReport cr = analyze(atlas, block, p, copt);
  if (cr.classify(copt) != PointClass::NonflatCN2)
    throw Error(ErrorCode::NotCN2Point, "Jacobi check needs a nonflat CN2 point");
  Mat T(n, 1);
  T.col(0) = T_dir;
  Mat Tn = orthonormalize(cr.g, T);
  // distance of T from the nullity: the component orthogonal to it
  Vec t = Tn.col(0);
  Vec proj = cr.nullity_basis * (cr.nullity_basis.transpose() * cr.g * t);
  double off = gnorm(cr.g, t - proj);
  if (off > 1e-4) throw Error(ErrorCode::NotInNullity, "direction is not in the nullity space");

  // State: x, v, dx (= J), dv, w (= transported J0).
  Eigen::VectorXd y0(5 * n);
  y0.segment(0, n) = p;
  y0.segment(n, n) = t;
  y0.segment(2 * n, n) = J0;
  // J'(0) = nabla_J0 T: the variation through nullity geodesics leaving the
  // conullity direction J0. Vanishes when the nullity is parallel.
  Vec dJ0 = Vec::Zero(n);
  if (n == 3) dJ0 = nullity_derivative(atlas, block, p, J0, t, SplittingOptions{});
  y0.segment(3 * n, n) = dJ0 - cr.christoffel.apply(t, J0);
  y0.segment(4 * n, n) = J0;
  auto f = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    Vec x = y.segment(0, n), v = y.segment(n, n), dx = y.segment(2 * n, n), dv = y.segment(3 * n, n),
        w = y.segment(4 * n, n);
    MetricJet jet = atlas.jet(block, x, 2);
    Connection G = christoffel(jet);
    std::array<double, 256> dG = christoffel_derivatives(jet);
    dy.resize(y.size());
    dy.segment(0, n) = v;
    dy.segment(n, n) = -G.apply(v, v);
    dy.segment(2 * n, n) = dv;
    Vec ddv = -2.0 * G.apply(v, dv);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s += dG[((l * n + k) * n + i) * n + j] * v[i] * v[j] * dx[l];
      ddv[k] -= s;
    }
    dy.segment(3 * n, n) = ddv;
    dy.segment(4 * n, n) = -G.apply(v, w);
  };
  std::vector<OdeSample> out;
  JacobiReport rep;
  try {
    integrate_dopri5(f, 0.0, y0, t_max, ode_options(atlas, opt), out);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LeftDomain || out.empty()) throw;
  }
  for (const OdeSample& s : out) {
    Vec x = s.y.segment(0, n);
    Mat g = atlas.metric_at(block, x);
    Vec J = s.y.segment(2 * n, n), w = s.y.segment(4 * n, n);
    double dev = gnorm(g, J - w);
    rep.t.push_back(s.t);
    rep.deviation.push_back(dev);
    rep.jacobi_norm.push_back(gnorm(g, J));
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  rep.t_max = out.back().t;
  return rep;
}

}  // namespace cn2
