#pragma once

// Levi-Civita connection, curvature tensor and curvature nullity at a point.
//
// Index conventions (all tensors dense, row-major, stride n):
//   christoffel  G[k][i][j]      = Gamma^k_ij
//   mixed        Rm[r][s][m][v]  = R^r_smv, with R(d_m, d_v) d_s = R^r_smv d_r
//   lowered      R[i][j][k][l]   = <R(d_i, d_j) d_l, d_k>
// where R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]. With these choices the scalar
// curvature g^ik g^jl R_ijkl is positive on round spheres.

#include <array>
#include <vector>

#include "metric.hpp"

namespace cn2 {

struct CurvatureOptions {
  double tau_rank = 1e-7;
  double tau_flat = 1e-9;
};

enum class PointClass { Flat, NonflatCN2, NotCN2 };
const char* point_class_name(PointClass c);

struct Connection {
  int n = 0;
  std::array<double, 64> gamma{};
  double& operator()(int k, int i, int j) { return gamma[(k * n + i) * n + j]; }
  double operator()(int k, int i, int j) const { return gamma[(k * n + i) * n + j]; }
  bool zero = false;  // exactly zero because every first derivative of g vanished

  /// Gamma(u, w)^k = Gamma^k_ij u^i w^j.
  Vec apply(const Vec& u, const Vec& w) const;
};

struct CurvatureReport {
  int n = 0;
  Vec point;
  Mat g;
  Connection christoffel;
  std::array<double, 256> riemann_mixed{};
  std::array<double, 256> riemann{};
  Mat ricci;
  double scal = 0.0;
  double norm = 0.0;  // Frobenius norm of R in a g-orthonormal frame
  int mu = 0;
  Mat nullity_basis;    // n x mu, g-orthonormal columns
  Mat conullity_basis;  // n x (n - mu)
  std::vector<double> singular_values;  // descending
  bool ill_separated = false;           // gap ratio below 10 at the rank cut

  double R(int i, int j, int k, int l) const { return riemann[((i * n + j) * n + k) * n + l]; }
  double Rm(int r, int s, int m, int v) const { return riemann_mixed[((r * n + s) * n + m) * n + v]; }

  /// R(X,Y)Z in coordinates.
  Vec apply(const Vec& X, const Vec& Y, const Vec& Z) const;
  PointClass classify(const CurvatureOptions& opt) const;
};

Connection christoffel(const MetricJet& jet);

/// dG[((l * n + k) * n + i) * n + j] = d_l Gamma^k_ij.
std::array<double, 256> christoffel_derivatives(const MetricJet& jet);

/// Full report from a second-order jet. Throws NotPositiveDefinite.
CurvatureReport curvature_from_jet(const MetricJet& jet, const Vec& point, const CurvatureOptions& opt);

CurvatureReport analyze(const Atlas& atlas, int block, const Vec& p, const CurvatureOptions& opt);

/// g-orthonormal frame E (columns) with E^T g E = I, from the Cholesky factor.
Mat orthonormal_frame(const Mat& g);

/// Spectral norm of the curvature operator restricted to the plane X ^ Y for
/// g-orthonormal X, Y: the largest singular value of W -> R(X,Y)W in an
/// orthonormal frame.
double curvature_operator_norm(const CurvatureReport& rep, const Vec& X, const Vec& Y);

}  // namespace cn2
