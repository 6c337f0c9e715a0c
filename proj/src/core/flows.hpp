#pragma once

// Geodesics, parallel transport, principal angles, the holonomy angle bound
// and the Jacobi-field certificate for parallel nullity.
//
// Integration runs in the unwrapped coordinates of a home block; samples are
// additionally reported in the canonical block coordinates.

#include <string>
#include <vector>

#include "curvature.hpp"
#include "ode.hpp"

namespace cn2 {

struct FlowOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_max = 0.0;  // 0: half the atlas margin
};

struct PathSample {
  double t = 0.0;
  int block = 0;
  Vec x, v;        // canonical block coordinates
  Vec x_raw, v_raw;  // unwrapped home-block coordinates
};

struct GeodesicPath {
  int home_block = 0;
  std::vector<PathSample> samples;
  std::vector<OdeSample> raw;  // state (x, v, extra...) in home coordinates
  bool complete = true;
  std::string stop_reason;  // error name when the path was cut short
  double tolerance = 0.0;

  /// Hermite-interpolated unwrapped position and velocity at t.
  void at(double t, Vec& x, Vec& v) const;
  std::string to_csv() const;
};

/// Speed-preserving geodesic from p with initial velocity v. LeftDomain stops
/// the path and is reported in stop_reason; StepUnderflow throws.
GeodesicPath integrate_geodesic(const Atlas& atlas, int block, const Vec& p, const Vec& v, double t_max,
                                const FlowOptions& opt = {});

/// Geodesic together with parallel transport of `vectors` along it. Each
/// returned column is the transported vector at the path end (home coords).
struct TransportResult {
  GeodesicPath path;
  Mat transported;  // n x k
};
TransportResult transport_geodesic(const Atlas& atlas, int block, const Vec& p, const Vec& v, double t_max,
                                   const Mat& vectors, const FlowOptions& opt = {});

/// Transport along straight coordinate legs between successive vertices
/// (home-block unwrapped coordinates). Returns the vectors at the last vertex.
Mat transport_polyline(const Atlas& atlas, int block, const std::vector<Vec>& vertices, const Mat& vectors,
                       const FlowOptions& opt = {});

/// Gram-Schmidt in g.
Mat orthonormalize(const Mat& g, const Mat& basis);

/// Principal angles in [0, pi/2], largest first. Throws DimensionMismatch.
std::vector<double> principal_angles(const Mat& g, const Mat& A, const Mat& B);

/// Angle between two vectors in g, computed without cancellation at small angles.
double vector_angle(const Mat& g, const Vec& a, const Vec& b);

struct HolonomyReport {
  int axis_u = 0, axis_v = 1;
  double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
  int k = 0;
  double delta_raw = 0.0;  // max sampled curvature-operator norm
  double delta = 0.0;      // delta_raw inflated by 5%
  double area = 0.0;
  double angle = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  std::string to_json() const;
};

/// Transports xi around the rectangle [u0,u1] x [v0,v1] in the coordinate
/// slice through `base` spanned by axes (axis_u, axis_v).
HolonomyReport holonomy_bound_check(const Atlas& atlas, int block, const Vec& base, int axis_u, int axis_v,
                                    double u0, double u1, double v0, double v1, const Vec& xi,
                                    const FlowOptions& opt = {});

struct JacobiReport {
  double max_deviation = 0.0;
  double t_max = 0.0;
  std::vector<double> t, deviation, jacobi_norm;
};

/// Integrates J'' + R(J, g')g' = 0 along the geodesic from p in direction T_dir,
/// with J(0) = J0 and J'(0) = nabla_J0 T for the unit nullity field T (zero when
/// the nullity is parallel), and compares with the parallel transport of J0.
/// Throws NotInNullity when T_dir is more than tau = 1e-4 away from the nullity.
JacobiReport jacobi_check(const Atlas& atlas, int block, const Vec& p, const Vec& T_dir, const Vec& J0, double t_max,
                          const CurvatureOptions& copt = {}, const FlowOptions& opt = {});

}  // namespace cn2
