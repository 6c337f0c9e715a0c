#include "curvature.hpp"

#include <cmath>

namespace cn2 {

const char* point_class_name(PointClass c) {
  switch (c) {
    case PointClass::Flat: return "Flat";
    case PointClass::NonflatCN2: return "NonflatCN2";
    case PointClass::NotCN2: return "NotCN2";
  }
  return "?";
}

Vec Connection::apply(const Vec& u, const Vec& w) const {
  Vec out = Vec::Zero(n);
  if (zero) return out;
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (*this)(k, i, j) * u[i] * w[j];
    out[k] = s;
  }
  return out;
}

Connection christoffel(const MetricJet& jet) {
  const int n = jet.n;
  Connection c;
  c.n = n;
  if (jet.first_derivatives_zero()) {
    c.zero = true;
    return c;
  }
  Mat ginv = jet.g.inverse();
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double low = 0.5 * (jet.dg[i](m, j) + jet.dg[j](m, i) - jet.dg[m](i, j));
        for (int k = 0; k < n; ++k) c(k, i, j) += ginv(k, m) * low;
      }
  return c;
}

std::array<double, 256> christoffel_derivatives(const MetricJet& jet) {
  const int n = jet.n;
  std::array<double, 256> dG{};
  if (jet.first_derivatives_zero()) {
    bool second_zero = true;
    for (int k = 0; k < n && second_zero; ++k)
      for (int l = 0; l < n && second_zero; ++l) second_zero = (jet.d2g[k][l].array() == 0.0).all();
    if (second_zero) return dG;
  }
  Mat ginv = jet.g.inverse();
  auto dGi = [n](int l, int k, int i, int j) { return ((l * n + k) * n + i) * n + j; };
  for (int l = 0; l < n; ++l) {
    Mat dginv = -ginv * jet.dg[l] * ginv;
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double low = 0.5 * (jet.dg[i](m, j) + jet.dg[j](m, i) - jet.dg[m](i, j));
          double dlow = 0.5 * (jet.d2g[l][i](m, j) + jet.d2g[l][j](m, i) - jet.d2g[l][m](i, j));
          for (int k = 0; k < n; ++k) dG[dGi(l, k, i, j)] += dginv(k, m) * low + ginv(k, m) * dlow;
        }
  }
  return dG;
}

Mat orthonormal_frame(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) check_positive_definite(g);
  Mat L = llt.matrixL();
  Mat Linv = L.triangularView<Eigen::Lower>().solve(Mat::Identity(g.rows(), g.cols()));
  return Linv.transpose();
}

CurvatureReport curvature_from_jet(const MetricJet& jet, const Vec& point, const CurvatureOptions& opt) {
  const int n = jet.n;
  CurvatureReport rep;
  rep.n = n;
  rep.point = point;
  rep.g = jet.g;
  check_positive_definite(jet.g);
  rep.christoffel = christoffel(jet);
  rep.ricci = Mat::Zero(n, n);
  const Mat E = orthonormal_frame(jet.g);

  bool flat_jet = rep.christoffel.zero;
  if (flat_jet) {
    for (int k = 0; k < n && flat_jet; ++k)
      for (int l = 0; l < n && flat_jet; ++l) flat_jet = (jet.d2g[k][l].array() == 0.0).all();
  }
  if (!flat_jet) {
    const Connection& G = rep.christoffel;
    Mat ginv = jet.g.inverse();
    const std::array<double, 256> dG = christoffel_derivatives(jet);
    auto dGi = [n](int l, int k, int i, int j) { return ((l * n + k) * n + i) * n + j; };
    auto Rmi = [n](int r, int s, int m, int v) { return ((r * n + s) * n + m) * n + v; };
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        for (int m = 0; m < n; ++m)
          for (int v = 0; v < n; ++v) {
            double val = dG[dGi(m, r, v, s)] - dG[dGi(v, r, m, s)];
            for (int l = 0; l < n; ++l) val += G(r, m, l) * G(l, v, s) - G(r, v, l) * G(l, m, s);
            rep.riemann_mixed[Rmi(r, s, m, v)] = val;
          }
    // R_ijkl = g_kr R^r_lij
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double val = 0.0;
            for (int r = 0; r < n; ++r) val += jet.g(k, r) * rep.riemann_mixed[Rmi(r, l, i, j)];
            rep.riemann[((i * n + j) * n + k) * n + l] = val;
          }
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        double val = 0.0;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) val += ginv(i, k) * rep.R(i, j, k, l);
        rep.ricci(j, l) = val;
      }
    double scal = 0.0;
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) scal += ginv(j, l) * rep.ricci(j, l);
    rep.scal = scal;
  }

  // Curvature in the orthonormal frame, flattened to an (n^3 x n) operator on X.
  std::array<double, 256> on{};
  if (!flat_jet) {
    std::array<double, 256> t1{}, t2{};
    auto idx = [n](int a, int b, int c, int d) { return ((a * n + b) * n + c) * n + d; };
    // contract one index at a time
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += E(i, a) * rep.R(i, j, k, l);
            t1[idx(a, j, k, l)] = s;
          }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += E(j, b) * t1[idx(a, j, k, l)];
            t2[idx(a, b, k, l)] = s;
          }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += E(k, c) * t2[idx(a, b, k, l)];
            t1[idx(a, b, c, l)] = s;
          }
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) s += E(l, d) * t1[idx(a, b, c, l)];
            on[idx(a, b, c, d)] = s;
            norm2 += s * s;
          }
    rep.norm = std::sqrt(norm2);
  }

  if (flat_jet || rep.norm == 0.0) {
    rep.mu = n;
    rep.nullity_basis = E;
    rep.conullity_basis = Mat::Zero(n, 0);
    rep.singular_values.assign(n, 0.0);
    return rep;
  }

  const int rows = n * n * n;
  Eigen::MatrixXd M(rows, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) M((b * n + c) * n + d, a) = on[((a * n + b) * n + c) * n + d];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  rep.singular_values.assign(sv.data(), sv.data() + n);
  const double cut = opt.tau_rank * (sv[0] + 1e-14);
  int rank = 0;
  while (rank < n && sv[rank] >= cut) ++rank;
  rep.mu = n - rank;
  if (rank > 0 && rank < n) {
    double below = sv[rank];
    rep.ill_separated = below > 0.0 && sv[rank - 1] / below < 10.0;
  }
  const Eigen::MatrixXd& V = svd.matrixV();
  Mat Vm = V;
  rep.conullity_basis = E * Vm.leftCols(rank);
  rep.nullity_basis = E * Vm.rightCols(n - rank);
  return rep;
}

CurvatureReport analyze(const Atlas& atlas, int block, const Vec& p, const CurvatureOptions& opt) {
  if (p.size() != atlas.dim) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the space");
  MetricJet jet;
  try {
    jet = atlas.jet(block, p, 2);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::LeftDomain) throw Error(ErrorCode::OutOfDomain, e.what());
    throw;
  }
  return curvature_from_jet(jet, p, opt);
}

Vec CurvatureReport::apply(const Vec& X, const Vec& Y, const Vec& Z) const {
  Vec out = Vec::Zero(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int sg = 0; sg < n; ++sg)
      for (int m = 0; m < n; ++m)
        for (int v = 0; v < n; ++v) s += Rm(r, sg, m, v) * Z[sg] * X[m] * Y[v];
    out[r] = s;
  }
  return out;
}

PointClass CurvatureReport::classify(const CurvatureOptions& opt) const {
  if (norm <= opt.tau_flat) return PointClass::Flat;
  return mu >= n - 2 ? PointClass::NonflatCN2 : PointClass::NotCN2;
}

double curvature_operator_norm(const CurvatureReport& rep, const Vec& X, const Vec& Y) {
  const int n = rep.n;
  const Mat E = orthonormal_frame(rep.g);
  Mat op(n, n);
  for (int b = 0; b < n; ++b) {
    Vec w = rep.apply(X, Y, E.col(b));
    // components in the orthonormal frame: E^{-1} w = E^T g w
    op.col(b) = E.transpose() * rep.g * w;
  }
  Eigen::JacobiSVD<Mat> svd(op);
  return svd.singularValues()[0];
}

}  // namespace cn2
