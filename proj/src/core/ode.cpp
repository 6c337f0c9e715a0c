#include "ode.hpp"

#include <algorithm>
#include <cmath>

namespace cn2 {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

}  // namespace

void integrate_dopri5(const OdeRhs& f, double t0, const Eigen::VectorXd& y0, double t1, const OdeOptions& opt,
                      std::vector<OdeSample>& out) {
  const Eigen::Index n = y0.size();
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n), ynew(n), tmp(n), err(n);
  double t = t0;
  y = y0;
  f(t, y, k1);
  out.push_back({t, y, k1});
  if (!(t1 > t0)) return;
  double h = std::min({opt.h_initial, opt.h_max, t1 - t0});
  for (long step = 0; step < opt.max_steps; ++step) {
    if (t >= t1) return;
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1))) {
      h = t1 - t;
      last = true;
    }
    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    double tnew = last ? t1 : t + h;
    f(tnew, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      norm += (err[i] / sc) * (err[i] / sc);
    }
    norm = std::sqrt(norm / static_cast<double>(std::max<Eigen::Index>(n, 1)));
    if (norm <= 1.0) {
      t = tnew;
      y = ynew;
      k1 = k7;
      out.push_back({t, y, k1});
      if (last) return;
    }
    double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    if (norm > 1.0) fac = std::min(fac, 1.0);
    h = std::min(h * fac, opt.h_max);
    if (h < opt.h_min) throw Error(ErrorCode::StepUnderflow, "integrator step size underflow");
  }
  throw Error(ErrorCode::StepUnderflow, "integrator exceeded its step budget");
}

Eigen::VectorXd hermite(const OdeSample& a, const OdeSample& b, double t) {
  double h = b.t - a.t;
  if (h == 0.0) return a.y;
  double s = (t - a.t) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  double h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s);
  double h11 = s * s * (s - 1);
  return h00 * a.y + h10 * h * a.dy + h01 * b.y + h11 * h * b.dy;
}

Eigen::VectorXd interpolate(const std::vector<OdeSample>& s, double t) {
  if (s.empty()) return {};
  if (t <= s.front().t) return s.front().y;
  if (t >= s.back().t) return s.back().y;
  auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const OdeSample& x) { return v < x.t; });
  const OdeSample& b = *it;
  const OdeSample& a = *(it - 1);
  return hermite(a, b, t);
}

}  // namespace cn2
