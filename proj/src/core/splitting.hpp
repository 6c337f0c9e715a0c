#pragma once

// Splitting tensor of the nullity distribution on three-manifolds, the Riccati
// flow it obeys along nullity geodesics, and the identities derived from it.

#include <string>
#include <vector>

#include "curvature.hpp"
#include "flows.hpp"

namespace cn2 {

using Mat2 = Eigen::Matrix2d;

struct SplittingOptions {
  double h_C = 1e-4;       // central-difference step for the nullity field
  double class_tol = 1e-9;  // zero / nilpotent decisions
  CurvatureOptions curvature;
};

/// Unit nullity vector at p (requires mu = n - 2 = 1), signed so that
/// <T, hint>_g >= 0. Throws NotCN2Point away from nonflat CN2 points.
Vec unit_nullity(const Atlas& atlas, int block, const Vec& p, const Vec& hint, const SplittingOptions& opt);

/// Covariant derivative nabla_X T of the unit nullity field, with T oriented
/// by `hint` at every stencil point. Throws OrientationFlip.
Vec nullity_derivative(const Atlas& atlas, int block, const Vec& p, const Vec& X, const Vec& hint,
                       const SplittingOptions& opt);

struct AdaptedFrame {
  Vec point;
  Vec T, e1, e2;
  double alpha = 0.0, beta = 0.0;  // <nabla_e1 e1, e2>, <nabla_e2 e2, e1>
  bool has_a = false;
  double a = 0.0;  // C_T e2 = a e1 when C_T is nilpotent
};

AdaptedFrame adapted_frame(const Atlas& atlas, int block, const Vec& p, const Vec& hint, const SplittingOptions& opt);

enum class SplitClass { Zero, Nilpotent, RealEigen, ComplexEigen };
const char* split_class_name(SplitClass c);
SplitClass classify_split(const Mat2& C, double tol = 1e-9);

struct SplittingTensor {
  Mat2 C = Mat2::Zero();  // column a holds C_T e_a in the basis (e1, e2)
  double trace = 0.0, det = 0.0;
  SplitClass cls = SplitClass::Zero;
};

/// C measured in the given frame (T, e1, e2) at p.
SplittingTensor splitting_tensor(const Atlas& atlas, int block, const Vec& p, const Vec& T, const Vec& e1,
                                 const Vec& e2, const SplittingOptions& opt);
SplittingTensor splitting_tensor(const Atlas& atlas, int block, const AdaptedFrame& f, const SplittingOptions& opt);

/// C0 (I - t C0)^{-1}. Throws Blowup, naming the singular times.
Mat2 riccati_closed_form(const Mat2& C0, double t);

/// (tr C(t), det C(t)) from the trace and determinant of C0 alone.
std::pair<double, double> trace_det_evolution(const Mat2& C0, double t);

/// Real singular times 1/lambda > 0 of the Riccati flow.
std::vector<double> singular_times(const Mat2& C0);

struct RiccatiFieldReport {
  std::vector<double> t;
  std::vector<Mat2> measured, predicted;
  std::vector<double> scal, scal_predicted;
  Mat2 C0 = Mat2::Zero();
  double max_deviation = 0.0;        // max norm of measured - predicted
  double max_scal_deviation = 0.0;   // relative
  double t_reached = 0.0;
  bool truncated = false;
};

/// Parallel frame along the nullity geodesic from p; C and Scal measured at
/// `samples` equally spaced times in [0, t_max].
RiccatiFieldReport riccati_field_check(const Atlas& atlas, int block, const Vec& p, const Vec& hint, double t_max,
                                       int samples, const SplittingOptions& opt);

struct DivergenceReport {
  double div = 0.0;
  double trace_C = 0.0;
  double residual = 0.0;
  double geodesic_residual = 0.0;  // |nabla_T T|
};

DivergenceReport divergence_check(const Atlas& atlas, int block, const Vec& p, const Vec& hint,
                                  const SplittingOptions& opt);

}  // namespace cn2
