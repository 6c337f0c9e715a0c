#include "splitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace cn2 {

namespace {

double gdot(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }

struct Frame3 {
  Vec T, e1, e2;
};

// Frame at p with e1 taken from a fixed coordinate axis, T oriented by hint.
Frame3 frame_from_axis(const Atlas& atlas, int block, const Vec& p, const Vec& hint, int axis,
                       const SplittingOptions& opt) {
  Frame3 f;
  f.T = unit_nullity(atlas, block, p, hint, opt);
  Mat g = atlas.metric_at(block, p);
  Vec d = Vec::Zero(3);
  d[axis] = 1.0;
  Vec pe = d - gdot(g, d, f.T) * f.T;
  double nrm = std::sqrt(gdot(g, pe, pe));
  if (!(nrm > 1e-8)) throw Error(ErrorCode::DegenerateFrame, "coordinate axis nearly parallel to the nullity");
  f.e1 = pe / nrm;
  Eigen::LLT<Mat> llt(g);
  Eigen::Matrix3d U = llt.matrixU();
  Eigen::Vector3d t = U * Eigen::Vector3d(f.T), a = U * Eigen::Vector3d(f.e1);
  Eigen::Vector3d b = t.cross(a);
  f.e2 = U.triangularView<Eigen::Upper>().solve(b);
  return f;
}

int best_axis(const Mat& g, const Vec& T) {
  int best = 0;
  double score = -1.0;
  for (int a = 0; a < 3; ++a) {
    Vec d = Vec::Zero(3);
    d[a] = 1.0;
    double dd = gdot(g, d, d);
    double along = gdot(g, d, T);
    double s = (dd - along * along) / dd;
    if (s > score + 1e-12) score = s, best = a;
  }
  return best;
}

Vec frame_vector_derivative(const Atlas& atlas, int block, const Vec& p, const Vec& X, const Vec& hint, int axis,
                            int which, const SplittingOptions& opt) {
  const double h = opt.h_C;
  Frame3 fp = frame_from_axis(atlas, block, p + h * X, hint, axis, opt);
  Frame3 fm = frame_from_axis(atlas, block, p - h * X, hint, axis, opt);
  Frame3 f0 = frame_from_axis(atlas, block, p, hint, axis, opt);
  const Vec& vp = which == 1 ? fp.e1 : fp.e2;
  const Vec& vm = which == 1 ? fm.e1 : fm.e2;
  const Vec& v0 = which == 1 ? f0.e1 : f0.e2;
  Connection G = christoffel(atlas.jet(block, p, 1));
  return (vp - vm) / (2 * h) + G.apply(X, v0);
}

}  // namespace

const char* split_class_name(SplitClass c) {
  switch (c) {
    case SplitClass::Zero: return "zero";
    case SplitClass::Nilpotent: return "nilpotent";
    case SplitClass::RealEigen: return "real_eigen";
    case SplitClass::ComplexEigen: return "complex_eigen";
  }
  return "?";
}

SplitClass classify_split(const Mat2& C, double tol) {
  if (C.cwiseAbs().maxCoeff() <= tol) return SplitClass::Zero;
  double tr = C.trace(), det = C.determinant();
  if (std::abs(tr) <= tol && std::abs(det) <= tol) return SplitClass::Nilpotent;
  if (tr * tr - 4 * det < -tol) return SplitClass::ComplexEigen;
  return SplitClass::RealEigen;
}

Vec unit_nullity(const Atlas& atlas, int block, const Vec& p, const Vec& hint, const SplittingOptions& opt) {
  if (atlas.dim != 3) throw Error(ErrorCode::DimensionMismatch, "splitting tensor is implemented for n = 3");
  CurvatureReport rep = analyze(atlas, block, p, opt.curvature);
  if (rep.classify(opt.curvature) != PointClass::NonflatCN2 || rep.mu != 1)
    throw Error(ErrorCode::NotCN2Point, "point is not a nonflat point with one-dimensional nullity");
  Vec T = rep.nullity_basis.col(0);
  double s = hint.size() == 3 ? gdot(rep.g, T, hint) : 0.0;
  if (s == 0.0) {
    int i;
    T.cwiseAbs().maxCoeff(&i);
    s = T[i];
  }
  return s < 0 ? Vec(-T) : T;
}

Vec nullity_derivative(const Atlas& atlas, int block, const Vec& p, const Vec& X, const Vec& hint,
                       const SplittingOptions& opt) {
  const double h = opt.h_C;
  Vec T0 = unit_nullity(atlas, block, p, hint, opt);
  Vec Tp = unit_nullity(atlas, block, p + h * X, T0, opt);
  Vec Tm = unit_nullity(atlas, block, p - h * X, T0, opt);
  Mat g = atlas.metric_at(block, p);
  if (gdot(g, Tp, T0) < 0.9 || gdot(g, Tm, T0) < 0.9)
    throw Error(ErrorCode::OrientationFlip, "nullity direction not continuous within the difference stencil");
  Connection G = christoffel(atlas.jet(block, p, 1));
  return (Tp - Tm) / (2 * h) + G.apply(X, T0);
}

AdaptedFrame adapted_frame(const Atlas& atlas, int block, const Vec& p, const Vec& hint, const SplittingOptions& opt) {
  CurvatureReport rep = analyze(atlas, block, p, opt.curvature);
  if (rep.classify(opt.curvature) != PointClass::NonflatCN2 || rep.mu != 1)
    throw Error(ErrorCode::NotCN2Point, "adapted frame needs a nonflat point with one-dimensional nullity");
  if (rep.ill_separated) throw Error(ErrorCode::DegenerateFrame, "nullity and conullity not separated");
  Vec T = unit_nullity(atlas, block, p, hint, opt);
  int axis = best_axis(rep.g, T);
  Frame3 f = frame_from_axis(atlas, block, p, T, axis, opt);
  AdaptedFrame af;
  af.point = p;
  af.T = f.T;
  af.e1 = f.e1;
  af.e2 = f.e2;
  Vec d11 = frame_vector_derivative(atlas, block, p, f.e1, T, axis, 1, opt);
  Vec d22 = frame_vector_derivative(atlas, block, p, f.e2, T, axis, 2, opt);
  af.alpha = gdot(rep.g, d11, f.e2);
  af.beta = gdot(rep.g, d22, f.e1);
  SplittingTensor st = splitting_tensor(atlas, block, p, f.T, f.e1, f.e2, opt);
  if (st.cls == SplitClass::Nilpotent) {
    af.has_a = true;
    af.a = st.C(0, 1);
  }
  return af;
}

SplittingTensor splitting_tensor(const Atlas& atlas, int block, const Vec& p, const Vec& T, const Vec& e1,
                                 const Vec& e2, const SplittingOptions& opt) {
  Mat g = atlas.metric_at(block, p);
  SplittingTensor st;
  const Vec* e[2] = {&e1, &e2};
  for (int a = 0; a < 2; ++a) {
    Vec d = nullity_derivative(atlas, block, p, *e[a], T, opt);
    for (int b = 0; b < 2; ++b) st.C(b, a) = -gdot(g, d, *e[b]);
  }
  st.trace = st.C.trace();
  st.det = st.C.determinant();
  st.cls = classify_split(st.C, opt.class_tol);
  return st;
}

SplittingTensor splitting_tensor(const Atlas& atlas, int block, const AdaptedFrame& f, const SplittingOptions& opt) {
  return splitting_tensor(atlas, block, f.point, f.T, f.e1, f.e2, opt);
}

std::vector<double> singular_times(const Mat2& C0) {
  std::vector<double> out;
  Eigen::EigenSolver<Mat2> es(C0);
  for (int i = 0; i < 2; ++i) {
    std::complex<double> l = es.eigenvalues()[i];
    if (std::abs(l.imag()) <= 1e-14 * std::max(1.0, std::abs(l.real())) && l.real() != 0.0)
      out.push_back(1.0 / l.real());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

[[noreturn]] void blowup(const Mat2& C0, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "Riccati flow is singular at t = " << t << " (singular times:";
  for (double s : singular_times(C0)) os << " " << s;
  os << ")";
  throw Error(ErrorCode::Blowup, os.str());
}

}  // namespace

Mat2 riccati_closed_form(const Mat2& C0, double t) {
  Mat2 M = Mat2::Identity() - t * C0;
  if (std::abs(M.determinant()) < 1e-12) blowup(C0, t);
  return C0 * M.inverse();
}

std::pair<double, double> trace_det_evolution(const Mat2& C0, double t) {
  double tr = C0.trace(), det = C0.determinant();
  double denom = 1 - t * tr + t * t * det;
  if (std::abs(denom) < 1e-12) blowup(C0, t);
  return {(tr - 2 * t * det) / denom, det / denom};
}

RiccatiFieldReport riccati_field_check(const Atlas& atlas, int block, const Vec& p, const Vec& hint, double t_max,
                                       int samples, const SplittingOptions& opt) {
  RiccatiFieldReport rep;
  AdaptedFrame f0 = adapted_frame(atlas, block, p, hint, opt);
  SplittingTensor st0 = splitting_tensor(atlas, block, f0, opt);
  rep.C0 = st0.C;
  double scal0 = analyze(atlas, block, p, opt.curvature).scal;
  Mat frame(3, 2);
  frame.col(0) = f0.e1;
  frame.col(1) = f0.e2;
  samples = std::max(samples, 2);
  for (int i = 0; i < samples; ++i) {
    double t = t_max * i / (samples - 1);
    Vec x = p, v = f0.T;
    Mat fr = frame;
    if (t > 0) {
      TransportResult tr = transport_geodesic(atlas, block, p, f0.T, t, frame);
      if (!tr.path.complete) {
        rep.truncated = true;
        break;
      }
      const Eigen::VectorXd& y = tr.path.raw.back().y;
      x = y.head(3);
      v = y.segment(3, 3);
      fr = tr.transported;
    }
    SplittingTensor st;
    double scal;
    try {
      Vec T = unit_nullity(atlas, block, x, v, opt);
      st = splitting_tensor(atlas, block, x, T, fr.col(0), fr.col(1), opt);
      scal = analyze(atlas, block, x, opt.curvature).scal;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotCN2Point && e.code() != ErrorCode::OutOfDomain &&
          e.code() != ErrorCode::LeftDomain)
        throw;
      rep.truncated = true;
      break;
    }
    Mat2 pred = riccati_closed_form(rep.C0, t);
    double denom = 1 - t * rep.C0.trace() + t * t * rep.C0.determinant();
    double scal_pred = scal0 / denom;
    rep.t.push_back(t);
    rep.measured.push_back(st.C);
    rep.predicted.push_back(pred);
    rep.scal.push_back(scal);
    rep.scal_predicted.push_back(scal_pred);
    rep.max_deviation = std::max(rep.max_deviation, (st.C - pred).norm());
    if (scal_pred != 0.0)
      rep.max_scal_deviation = std::max(rep.max_scal_deviation, std::abs(scal - scal_pred) / std::abs(scal_pred));
    rep.t_reached = t;
  }
  return rep;
}

DivergenceReport divergence_check(const Atlas& atlas, int block, const Vec& p, const Vec& hint,
                                  const SplittingOptions& opt) {
  DivergenceReport rep;
  AdaptedFrame f = adapted_frame(atlas, block, p, hint, opt);
  SplittingTensor st = splitting_tensor(atlas, block, f, opt);
  rep.trace_C = st.trace;
  // Coordinate divergence d_i T^i + Gamma^i_ik T^k, independent of the frame.
  const double h = opt.h_C;
  Connection G = christoffel(atlas.jet(block, p, 1));
  double div = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec d = Vec::Zero(3);
    d[i] = 1.0;
    Vec Tp = unit_nullity(atlas, block, p + h * d, f.T, opt);
    Vec Tm = unit_nullity(atlas, block, p - h * d, f.T, opt);
    div += (Tp[i] - Tm[i]) / (2 * h);
    for (int k = 0; k < 3; ++k) div += G(i, i, k) * f.T[k];
  }
  rep.div = div;
  rep.residual = std::abs(div + st.trace);
  Vec dTT = nullity_derivative(atlas, block, p, f.T, f.T, opt);
  Mat g = atlas.metric_at(block, p);
  rep.geodesic_residual = std::sqrt(std::max(0.0, gdot(g, dTT, dTT)));
  return rep;
}

}  // namespace cn2
