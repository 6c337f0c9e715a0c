#pragma once

// Dormand-Prince 5(4) integrator with cubic Hermite dense output.

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace cn2 {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_initial = 1e-3;
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-13;
  long max_steps = 2'000'000;
};

struct OdeSample {
  double t = 0.0;
  Eigen::VectorXd y, dy;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

/// Integrates y' = f(t, y) from t0 to t1 (t1 > t0), appending the start and
/// every accepted step to `out`. Exceptions thrown by f propagate after `out`
/// holds the accepted prefix. Throws StepUnderflow.
void integrate_dopri5(const OdeRhs& f, double t0, const Eigen::VectorXd& y0, double t1, const OdeOptions& opt,
                      std::vector<OdeSample>& out);

/// Cubic Hermite interpolation between two consecutive samples.
Eigen::VectorXd hermite(const OdeSample& a, const OdeSample& b, double t);

/// Interpolates a sampled trajectory at t (clamped to its range).
Eigen::VectorXd interpolate(const std::vector<OdeSample>& s, double t);

}  // namespace cn2
