#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "builtins.hpp"
#include "json.hpp"
#include "ode.hpp"
#include "splitting.hpp"
#include "verify_internal.hpp"

namespace cn2 {

int SuiteResult::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }));
}

int SuiteResult::failed() const { return static_cast<int>(checks.size()) - passed(); }

std::string SuiteResult::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["passed"] = passed();
  j["failed"] = failed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tol", c.tol}, {"detail", c.detail}});
  j["checks"] = arr;
  return j.dump(2);
}

namespace verify_detail {

double Rng::uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }

int Rng::pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }

Vec Rng::unit(int n) {
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = std::normal_distribution<double>()(gen);
  } while (v.norm() < 1e-3);
  return v / v.norm();
}

Vec random_point(const Atlas& at, int block, Rng& rng, double inset) {
  const ChartSpec& c = at.chart(block);
  Vec x(at.dim);
  for (int a = 0; a < at.dim; ++a) {
    double w = c.width(a);
    x[a] = rng.uni(c.lo[a] + inset * w, c.hi[a] - inset * w);
  }
  return x;
}

Check make_check(std::string name, double value, double tol, std::string detail) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.tol = tol;
  c.pass = value <= tol;  // NaN fails
  c.detail = std::move(detail);
  return c;
}

Check bool_check(std::string name, bool ok, std::string detail) {
  Check c;
  c.name = std::move(name);
  c.pass = ok;
  c.value = ok ? 0.0 : 1.0;
  c.detail = std::move(detail);
  return c;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double line_angle(const Mat& g, const Vec& a, const Vec& b) {
  double t = vector_angle(g, a, b);
  return std::min(t, std::numbers::pi - t);
}

}  // namespace verify_detail

using namespace verify_detail;

namespace {

struct Family {
  std::string name;
  std::string params;
};

const std::vector<Family>& families() {
  static const std::vector<Family> f = {
      {"flat3", ""},         {"flat2", ""},           {"flat4", ""},
      {"cone", ""},          {"sphere_product", ""},  {"sphere2", ""},
      {"sphere3", ""},       {"strip_cylinder", ""},  {"hypersurface_graph", ""},
      {"ex1", ""},           {"ex2", ""},             {"ex3", "N=3"},
      {"ex4", "N=2"},
  };
  return f;
}

double riemann_scale(const CurvatureReport& r) {
  double m = 0.0;
  for (int i = 0; i < r.n * r.n * r.n * r.n; ++i) m = std::max(m, std::abs(r.riemann[i]));
  return m;
}

/// Max of the antisymmetry, pair-symmetry and first Bianchi residuals, relative to max |R|.
double symmetry_residual(const CurvatureReport& r) {
  const int n = r.n;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double R = r.R(i, j, k, l);
          worst = std::max({worst, std::abs(R + r.R(j, i, k, l)), std::abs(R + r.R(i, j, l, k)),
                            std::abs(R - r.R(k, l, i, j)), std::abs(R + r.R(j, k, i, l) + r.R(k, i, j, l))});
        }
  double s = riemann_scale(r);
  return s > 1.0 ? worst / s : worst;
}

double compatibility_residual(const Atlas& at, int block, const Vec& x) {
  MetricJet j = at.jet(block, x, 1);
  Connection G = christoffel(j);
  const int n = at.dim;
  double worst = 0.0, scale = 1.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) {
        double rhs = 0.0;
        for (int m = 0; m < n; ++m) rhs += j.g(m, l) * G(m, k, i) + j.g(i, m) * G(m, k, l);
        worst = std::max(worst, std::abs(j.dg[k](i, l) - rhs));
        scale = std::max(scale, std::abs(j.dg[k](i, l)));
      }
  return worst / scale;
}

/// max |<R(X, Y)Z, W>| over a g-orthonormal frame, for X in the nullity basis.
double kernel_residual(const CurvatureReport& r) {
  if (r.mu == 0) return 0.0;
  Mat E = orthonormal_frame(r.g);
  const int n = r.n;
  double worst = 0.0;
  for (int c = 0; c < r.mu; ++c) {
    Vec X = r.nullity_basis.col(c);
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z) {
        Vec RZ = r.apply(X, E.col(y), E.col(z));
        Vec low = r.g * RZ;
        for (int w = 0; w < n; ++w) worst = std::max(worst, std::abs(low.dot(E.col(w))));
      }
  }
  return worst;
}

double orthonormality_residual(const CurvatureReport& r) {
  const int n = r.n;
  Mat B(n, n);
  B << r.nullity_basis, r.conullity_basis;
  Mat I = Mat::Identity(n, n);
  return (B.transpose() * r.g * B - I).cwiseAbs().maxCoeff() / std::max(1.0, r.g.cwiseAbs().maxCoeff());
}

SuiteResult suite_curvature(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  CurvatureOptions opt;

  {
    Atlas f = make_flat(3);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) worst = std::max(worst, analyze(f, 0, random_point(f, 0, rng), opt).norm);
    res.checks.push_back(make_check("flat3 |R| (AD)", worst, 1e-12, "100 random points"));
  }
  {
    Atlas sp = make_sphere_product(1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i)
      worst = std::max(worst, std::abs(analyze(sp, 0, random_point(sp, 0, rng, 0.05), opt).scal - 2.0));
    res.checks.push_back(make_check("sphere_product scal = 2", worst, 1e-8, "100 random points"));
  }
  {
    const double c = std::sqrt(0.5);
    Atlas cone = make_cone(c);
    Vec p(3);
    p << 1.0, 1.2, 0.5;
    double expect = 2 * (1 - c * c) / (c * c);
    double s = analyze(cone, 0, p, opt).scal;
    res.checks.push_back(make_check("cone(1/sqrt2) scal at r=1", std::abs(s - expect), 1e-6,
                                    "measured " + num(s) + ", warped-product formula 2(1-c^2)/(c^2 r^2) = " +
                                        num(expect)));
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec q = random_point(cone, 0, rng, 0.05);
      double e = 2 * (1 - c * c) / (c * c * q[0] * q[0]);
      worst = std::max(worst, std::abs(analyze(cone, 0, q, opt).scal - e) / e);
    }
    res.checks.push_back(make_check("cone scal matches formula (relative)", worst, 1e-8, "100 random points"));
  }
  {
    Atlas s2 = make_sphere2();
    Vec p(2);
    p << std::numbers::pi / 4, 0.3;
    CurvatureReport r = analyze(s2, 0, p, opt);
    res.checks.push_back(make_check("sphere2 Gamma^theta_phiphi at pi/4", std::abs(r.christoffel(0, 1, 1) + 0.5),
                                    1e-14, "expected -sin cos = -0.5"));
    Atlas st = make_strip_cylinder();
    Vec q(2);
    q << 0.0, 0.7;
    double g = analyze(st, 0, q, opt).christoffel(0, 1, 1);
    res.checks.push_back(make_check("strip Gamma^r_tt at r=0", std::abs(g), 1e-15, "even exponent in r"));
  }

  double sym = 0.0, compat = 0.0, kern = 0.0, ortho = 0.0;
  int count_bad = 0;
  for (const auto& fam : families()) {
    Atlas at = make_builtin(fam.name, parse_params(fam.params));
    for (int i = 0; i < 1000; ++i) {
      int b = rng.pick(static_cast<int>(at.blocks.size()));
      Vec x = random_point(at, b, rng, 0.02);
      CurvatureReport r = analyze(at, b, x, opt);
      sym = std::max(sym, symmetry_residual(r));
      compat = std::max(compat, compatibility_residual(at, b, x));
      double k = kernel_residual(r);
      if (k > opt.tau_rank * r.norm + 1e-14) ++count_bad;
      // flat points: every vector is null, nothing to compare against
      if (r.norm > opt.tau_flat) kern = std::max(kern, k / r.norm);
      ortho = std::max(ortho, orthonormality_residual(r));
      if (r.mu + r.conullity_basis.cols() != at.dim) ++count_bad;
    }
  }
  res.checks.push_back(make_check("symmetries and first Bianchi (AD, relative)", sym, 1e-9,
                                  "1000 random points on each of 13 builtins"));
  res.checks.push_back(make_check("metric compatibility of Gamma", compat, 1e-9, "same points"));
  res.checks.push_back(make_check("nullity vectors annihilate R (relative to |R|)", kern, opt.tau_rank, "same points"));
  res.checks.push_back(make_check("bases g-orthonormal", ortho, 1e-12, "same points"));
  res.checks.push_back(make_check("nullity count violations", count_bad, 0, "mu + conullity = n and kernel bound"));

  {
    double worst = 0.0;
    for (const char* name : {"cone", "sphere_product", "ex1"}) {
      Atlas at = make_builtin(name);
      at.fd = true;
      for (int i = 0; i < 50; ++i) {
        int b = rng.pick(static_cast<int>(at.blocks.size()));
        worst = std::max(worst, symmetry_residual(analyze(at, b, random_point(at, b, rng, 0.05), opt)));
      }
    }
    res.checks.push_back(make_check("symmetries and first Bianchi (finite differences)", worst, 1e-5,
                                    "50 points each on cone, sphere_product, ex1"));
  }
  {
    double scal_err = 0.0, angle = 0.0;
    bool same_class = true;
    for (const char* name : {"cone", "sphere_product", "ex1"}) {
      Atlas a1 = make_builtin(name), a2 = make_builtin(name, {{"scale", "2"}});
      for (int i = 0; i < 50; ++i) {
        int b = rng.pick(static_cast<int>(a1.blocks.size()));
        Vec x = random_point(a1, b, rng, 0.05);
        CurvatureReport r1 = analyze(a1, b, x, opt), r2 = analyze(a2, b, x, opt);
        same_class = same_class && r1.classify(opt) == r2.classify(opt) && r1.mu == r2.mu;
        if (std::abs(r1.scal) > 1e-6) scal_err = std::max(scal_err, std::abs(r2.scal * 4 / r1.scal - 1));
        if (r1.mu == 1 && r2.mu == 1)
          angle = std::max(angle, line_angle(r1.g, r1.nullity_basis.col(0), r2.nullity_basis.col(0)));
      }
    }
    res.checks.push_back(make_check("scaling by 4 divides scal by 4 (relative)", scal_err, 1e-9, "lambda = 2"));
    res.checks.push_back(make_check("scaling keeps the nullity", angle, 1e-8, "lambda = 2"));
    res.checks.push_back(bool_check("scaling keeps the classification", same_class, "lambda = 2"));
  }
  return res;
}

struct KnownNullity {
  const char* name;
  // returns a nonflat sample point and its block
  std::function<std::pair<int, Vec>(const Atlas&, Rng&)> point;
  std::function<Vec(const Atlas&, int)> direction;
};

SuiteResult suite_nullity(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  CurvatureOptions opt;
  auto axis_dir = [](int axis) {
    return [axis](const Atlas& at, int) {
      Vec v = Vec::Zero(at.dim);
      v[axis] = 1.0;
      return v;
    };
  };
  std::vector<KnownNullity> cases = {
      {"ex1",
       [](const Atlas& at, Rng& r) {
         int b = r.pick(2);
         Vec x = random_point(at, b, r);
         x[0] = r.uni(-0.7, 0.7);
         x[1] = r.uni(-0.7, 0.7);
         return std::make_pair(b, x);
       },
       [](const Atlas& at, int b) {
         Vec v = Vec::Zero(at.dim);
         v[at.blocks[b].nullity_axis] = 1.0;
         return v;
       }},
      {"sphere_product", [](const Atlas& at, Rng& r) { return std::make_pair(0, random_point(at, 0, r, 0.05)); },
       axis_dir(2)},
      {"cone", [](const Atlas& at, Rng& r) { return std::make_pair(0, random_point(at, 0, r, 0.02)); }, axis_dir(0)},
  };
  for (auto& cs : cases) {
    Atlas at = make_builtin(cs.name);
    double worst = 0.0;
    int wrong_mu = 0, flat = 0;
    for (int i = 0; i < 1000; ++i) {
      auto [b, x] = cs.point(at, rng);
      CurvatureReport r = analyze(at, b, x, opt);
      PointClass pc = r.classify(opt);
      if (pc == PointClass::Flat) {
        ++flat;
        continue;
      }
      if (pc != PointClass::NonflatCN2 || r.mu != at.dim - 2) {
        ++wrong_mu;
        continue;
      }
      worst = std::max(worst, line_angle(r.g, r.nullity_basis.col(0), cs.direction(at, b)));
    }
    res.checks.push_back(make_check(std::string(cs.name) + ": nullity angle to the known direction", worst, 1e-6,
                                    "1000 random points, " + std::to_string(flat) + " fell in flat cells"));
    res.checks.push_back(make_check(std::string(cs.name) + ": points with mu != n-2", wrong_mu, 0, ""));
  }
  {
    Atlas s3 = make_sphere3();
    int not_cn2 = 0;
    for (int i = 0; i < 50; ++i) {
      CurvatureReport r = analyze(s3, 0, random_point(s3, 0, rng, 0.05), opt);
      if (r.classify(opt) == PointClass::NotCN2 && r.mu == 0) ++not_cn2;
    }
    res.checks.push_back(bool_check("sphere3 is NotCN2 with mu = 0", not_cn2 == 50, std::to_string(not_cn2) + "/50"));
  }
  return res;
}

Mat2 random_c0(Rng& rng) {
  Mat2 C;
  C << rng.uni(-2, 2), rng.uni(-2, 2), rng.uni(-2, 2), rng.uni(-2, 2);
  double rad = C.eigenvalues().cwiseAbs().maxCoeff();
  double target = rng.uni(0.0, 2.0);
  if (rad > 0) C *= target / rad;
  return C;
}

SuiteResult suite_riccati(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  double flow = 0.0, tracedet = 0.0, fd = 0.0;
  int class_changes = 0;
  OdeOptions o;
  o.rtol = 1e-13;
  o.atol = 1e-13;
  o.h_initial = 1e-4;
  for (int i = 0; i < 100; ++i) {
    Mat2 C0 = random_c0(rng);
    Eigen::VectorXd y0(4);
    y0 << C0(0, 0), C0(0, 1), C0(1, 0), C0(1, 1);
    auto rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      Mat2 C;
      C << y[0], y[1], y[2], y[3];
      Mat2 D = C * C;
      dy.resize(4);
      dy << D(0, 0), D(0, 1), D(1, 0), D(1, 1);
    };
    SplitClass c0 = classify_split(C0, 1e-9);
    for (int s = 0; s <= 8; ++s) {
      double t = 0.05 * s;
      Eigen::VectorXd y = y0;
      if (t > 0) {
        std::vector<OdeSample> out;
        integrate_dopri5(rhs, 0.0, y0, t, o, out);
        y = out.back().y;
      }
      Mat2 num_c;
      num_c << y[0], y[1], y[2], y[3];
      Mat2 closed = riccati_closed_form(C0, t);
      flow = std::max(flow, (num_c - closed).cwiseAbs().maxCoeff());
      auto [tr, det] = trace_det_evolution(C0, t);
      tracedet = std::max({tracedet, std::abs(tr - closed.trace()), std::abs(det - closed.determinant())});
      const double h = 1e-6;
      if (t > 0) {
        Mat2 d = (riccati_closed_form(C0, t + h) - riccati_closed_form(C0, t - h)) / (2 * h);
        fd = std::max(fd, (d - closed * closed).cwiseAbs().maxCoeff());
      }
      double disc0 = C0.trace() * C0.trace() - 4 * C0.determinant();
      if (std::abs(disc0) > 1e-6 && classify_split(closed, 1e-9) != c0) ++class_changes;
    }
  }
  res.checks.push_back(make_check("integrated C' = C^2 vs closed form", flow, 1e-8, "100 random C0, t in [0, 0.4]"));
  res.checks.push_back(make_check("trace and det evolution", tracedet, 1e-10, "same samples"));
  res.checks.push_back(make_check("finite-difference derivative equals C^2", fd, 1e-6, "step 1e-6"));
  res.checks.push_back(make_check("eigenvalue class changes along the flow", class_changes, 0, ""));

  double nil = 0.0;
  for (int i = 0; i < 20; ++i) {
    double a = rng.uni(-2, 2), psi = rng.uni(0, 2 * std::numbers::pi);
    Mat2 R;
    R << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
    Mat2 N;
    N << 0, a, 0, 0;
    Mat2 C0 = R * N * R.transpose();
    for (double t : {0.1, 1.0, 5.0, 50.0}) nil = std::max(nil, (riccati_closed_form(C0, t) - C0).cwiseAbs().maxCoeff());
  }
  res.checks.push_back(make_check("nilpotent C0 stays constant", nil, 1e-12, "20 random nilpotent C0"));
  {
    Mat2 C0;
    C0 << 0, 1, 0, 0;
    Mat2 C = riccati_closed_form(C0, 5.0);
    res.checks.push_back(
        bool_check("nilpotent example at t=5", C == C0 && classify_split(C) == SplitClass::Nilpotent, ""));
    Mat2 J;
    J << 0, -1, 1, 0;
    Mat2 expect;
    expect << -0.5, -0.5, 0.5, -0.5;
    res.checks.push_back(make_check("rotation generator at t=1", (riccati_closed_form(J, 1.0) - expect).norm(),
                                    1e-15, "J (I - J)^{-1}"));
    Mat2 I2 = Mat2::Identity();
    bool threw = false;
    try {
      riccati_closed_form(I2, 1.0);
    } catch (const Error& e) {
      threw = e.code() == ErrorCode::Blowup;
    }
    res.checks.push_back(bool_check("blowup at t = 1/lambda", threw, "C0 = I, t = 1"));
  }
  return res;
}

SuiteResult suite_cone_field(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  SplittingOptions so;
  Atlas cone = make_cone(std::sqrt(0.5));
  Vec p(3), hint(3);
  p << 1.0, 1.2, 0.5;
  hint << 1, 0, 0;
  RiccatiFieldReport r = riccati_field_check(cone, 0, p, hint, 2.0, 21, so);
  double exact = 0.0, tr = 0.0, scal = 0.0;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    double t = r.t[i];
    exact = std::max(exact, (r.measured[i] + Mat2::Identity() / (1 + t)).cwiseAbs().maxCoeff());
    tr = std::max(tr, std::abs(r.measured[i].trace() - trace_det_evolution(r.C0, t).first));
    scal = std::max(scal, std::abs(r.scal[i] * (1 + t) * (1 + t) - r.scal[0]) / std::abs(r.scal[0]));
  }
  res.checks.push_back(bool_check("geodesic reached t = 2", !r.truncated && r.t_reached == 2.0, ""));
  res.checks.push_back(make_check("C(t) = -I/(r0+t)", exact, 1e-5, "r0 = 1, 21 samples on [0, 2]"));
  res.checks.push_back(make_check("tr C(t) matches the trace evolution", tr, 1e-5, ""));
  res.checks.push_back(make_check("Scal(t)(r0+t)^2 constant (relative)", scal, 1e-5, ""));
  res.checks.push_back(make_check("field C vs closed form from C0", r.max_deviation, 1e-5, ""));

  double conj = 0.0, inv = 0.0, scale_err = 0.0;
  Atlas cone2 = make_builtin("cone", {{"scale", "2"}});
  for (int i = 0; i < 10; ++i) {
    Vec q(3);
    q << rng.uni(0.8, 3.0), rng.uni(0.4, std::numbers::pi - 0.4), rng.uni(0.1, 6.0);
    AdaptedFrame f = adapted_frame(cone, 0, q, hint, so);
    SplittingTensor st = splitting_tensor(cone, 0, f, so);
    double psi = rng.uni(0, 2 * std::numbers::pi);
    Vec e1 = std::cos(psi) * f.e1 + std::sin(psi) * f.e2, e2 = -std::sin(psi) * f.e1 + std::cos(psi) * f.e2;
    SplittingTensor sr = splitting_tensor(cone, 0, q, f.T, e1, e2, so);
    Mat2 R;
    R << std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi);
    conj = std::max(conj, (sr.C - R.transpose() * st.C * R).cwiseAbs().maxCoeff());
    inv = std::max({inv, std::abs(sr.trace - st.trace), std::abs(sr.det - st.det)});
    AdaptedFrame f2 = adapted_frame(cone2, 0, q, hint, so);
    SplittingTensor s2 = splitting_tensor(cone2, 0, f2, so);
    scale_err = std::max({scale_err, std::abs(s2.trace - st.trace / 2), std::abs(s2.det - st.det / 4)});
  }
  res.checks.push_back(make_check("frame rotation conjugates C", conj, 1e-8, "10 random cone points"));
  res.checks.push_back(make_check("tr and det frame invariant", inv, 1e-9, ""));
  res.checks.push_back(make_check("C scales by 1/lambda", scale_err, 1e-8, "lambda = 2, via tr and det"));
  return res;
}

SuiteResult suite_divergence(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  SplittingOptions so;
  {
    Atlas cone = make_cone(std::sqrt(0.5));
    Vec hint(3);
    hint << 1, 0, 0;
    double worst = 0.0, geo = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec q(3);
      q << rng.uni(0.8, 3.0), rng.uni(0.4, std::numbers::pi - 0.4), rng.uni(0.1, 6.0);
      DivergenceReport d = divergence_check(cone, 0, q, hint, so);
      worst = std::max(worst, d.residual);
      geo = std::max(geo, d.geodesic_residual);
    }
    res.checks.push_back(make_check("cone |div T + tr C|", worst, 1e-5, "100 random points"));
    res.checks.push_back(make_check("cone nullity geodesic residual", geo, 1e-5, "|nabla_T T|"));
  }
  {
    Atlas ex1 = make_ex1();
    Vec hint(3);
    hint << 0, 0, 1;
    double worst = 0.0;
    int used = 0;
    for (int i = 0; i < 100; ++i) {
      Vec q(3);
      q << rng.uni(-0.7, 0.7), rng.uni(-0.7, 0.7), rng.uni(-1, 1);
      try {
        worst = std::max(worst, divergence_check(ex1, 0, q, hint, so).residual);
        ++used;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotCN2Point) throw;
      }
    }
    res.checks.push_back(make_check("ex1 |div T + tr C|", worst, 1e-5, std::to_string(used) + " nonflat points"));
  }
  return res;
}

SuiteResult suite_holonomy(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  const std::vector<std::string> names = {"sphere2", "cone", "sphere_product", "ex1", "flat3", "strip_cylinder",
                                          "hypersurface_graph"};
  std::vector<Atlas> atlases;
  for (auto& n : names) atlases.push_back(make_builtin(n));
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < 200; ++i) {
    int f = i % static_cast<int>(atlases.size());
    const Atlas& at = atlases[f];
    int b = rng.pick(static_cast<int>(at.blocks.size()));
    const ChartSpec& c = at.chart(b);
    int u = rng.pick(at.dim), v = rng.pick(at.dim - 1);
    if (v >= u) ++v;
    Vec base = random_point(at, b, rng, 0.05);
    auto interval = [&](int a) {
      double w = c.width(a), lo = c.lo[a] + 0.05 * w, hi = c.hi[a] - 0.05 * w;
      double len = rng.uni(0.05, 0.6) * w;
      double s = rng.uni(lo, hi - len);
      return std::make_pair(s, s + len);
    };
    auto [u0, u1] = interval(u);
    auto [v0, v1] = interval(v);
    HolonomyReport h = holonomy_bound_check(at, b, base, u, v, u0, u1, v0, v1, rng.unit(at.dim));
    if (!h.satisfied) ++violations;
    if (h.bound > 0) worst_ratio = std::max(worst_ratio, h.angle / h.bound);
  }
  res.checks.push_back(make_check("rectangles violating angle <= (k-1) delta area", violations, 0,
                                  "200 random rectangles on 7 builtins; worst angle/bound " + num(worst_ratio)));
  {
    Atlas s2 = make_sphere2();
    Vec base(2), xi(2);
    base << 0.5, 0.0;
    xi << 1, 0;
    HolonomyReport h = holonomy_bound_check(s2, 0, base, 0, 1, 1e-4, 1.0, 0, 2 * std::numbers::pi, xi);
    double gb = 2 * std::numbers::pi * (std::cos(1e-4) - std::cos(1.0));
    res.checks.push_back(make_check("spherical cap: angle equals enclosed curvature", std::abs(h.angle - h.area), 1e-6,
                                    "angle " + num(h.angle) + ", area " + num(h.area)));
    res.checks.push_back(make_check("spherical cap area", std::abs(h.area - gb), 1e-9, "2 pi (cos a - cos b)"));
    res.checks.push_back(make_check("spherical cap raw delta = 1", std::abs(h.delta_raw - 1.0), 1e-9, ""));
  }
  return res;
}

SuiteResult suite_jacobi(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  {
    Atlas ex1 = make_ex1();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      Vec p(3), T(3), J(3);
      p << rng.uni(-0.6, 0.6), rng.uni(-0.6, 0.6), rng.uni(-1, 1);
      T << 0, 0, 1;
      double a = rng.uni(0, 2 * std::numbers::pi);
      J << std::cos(a), std::sin(a), 0;
      try {
        worst = std::max(worst, jacobi_check(ex1, 0, p, T, J, 2.0).max_deviation);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotCN2Point) throw;
      }
    }
    res.checks.push_back(make_check("ex1 Jacobi field equals parallel transport", worst, 1e-6,
                                    "20 nullity geodesics, t_max = 2"));
  }
  {
    const double c = std::sqrt(0.5);
    Atlas cone = make_cone(c);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      double r0 = rng.uni(0.8, 1.5);
      Vec p(3), T(3), J(3);
      p << r0, rng.uni(0.6, std::numbers::pi - 0.6), rng.uni(0.1, 6.0);
      T << 1, 0, 0;
      J << 0, rng.uni(-1, 1), rng.uni(-1, 1);
      Mat g = cone.metric_at(0, p);
      double jn = std::sqrt(J.dot(g * J));
      JacobiReport jr = jacobi_check(cone, 0, p, T, J, 2.0);
      for (std::size_t k = 0; k < jr.t.size(); ++k)
        worst = std::max(worst, std::abs(jr.deviation[k] - ((r0 + jr.t[k]) / r0 - 1) * jn));
    }
    res.checks.push_back(make_check("cone deviation = ((r0+t)/r0 - 1)|J0|", worst, 1e-4, "5 radial geodesics"));
  }
  return res;
}

SuiteResult suite_transport(std::uint64_t seed) {
  SuiteResult res;
  Rng rng(seed);
  {
    Atlas s2 = make_sphere2();
    Vec p(2), v(2);
    p << std::numbers::pi / 2, 0.3;
    v << 0, 1;
    GeodesicPath g = integrate_geodesic(s2, 0, p, v, 2 * std::numbers::pi);
    const auto& e = g.samples.back();
    double err = std::hypot(e.x[0] - p[0], std::remainder(e.x[1] - p[1], 2 * std::numbers::pi));
    res.checks.push_back(make_check("great circle closes", err, 1e-7, "equator, length 2 pi"));
    double speed = 0.0;
    for (const auto& s : g.samples) {
      Mat gm = s2.metric_at(0, s.x);
      speed = std::max(speed, std::abs(std::sqrt(s.v.dot(gm * s.v)) - 1.0));
    }
    res.checks.push_back(make_check("geodesic speed preserved", speed, 1e-8, ""));
  }
  double rev = 0.0;
  for (const char* name : {"sphere2", "ex1", "cone"}) {
    Atlas at = make_builtin(name);
    for (int i = 0; i < 5; ++i) {
      std::vector<Vec> poly;
      Vec x = random_point(at, 0, rng, 0.3);
      poly.push_back(x);
      for (int k = 0; k < 3; ++k) {
        Vec step = rng.unit(at.dim) * 0.3;
        x = x + step;
        poly.push_back(x);
      }
      if (std::string(name) == "ex1") {
        // cross the quarter-turn glue along x
        Vec far = poly.back();
        far[0] = 1.4;
        poly.push_back(far);
      }
      Mat W = Mat::Identity(at.dim, at.dim);
      Mat fwd = transport_polyline(at, 0, poly, W);
      std::vector<Vec> back(poly.rbegin(), poly.rend());
      Mat again = transport_polyline(at, 0, back, fwd);
      rev = std::max(rev, (again - W).cwiseAbs().maxCoeff());
    }
  }
  res.checks.push_back(make_check("transport there and back is the identity", rev, 1e-7, "polylines on 3 builtins"));
  {
    Mat g = Mat::Identity(3, 3);
    Mat A(3, 1), B(3, 1);
    A << 1, 0, 0;
    B << 0, 1, 0;
    double a = principal_angles(g, A, B).front();
    res.checks.push_back(make_check("orthogonal lines at pi/2", std::abs(a - std::numbers::pi / 2), 1e-15, ""));
    B << 1, 1e-9, 0;
    a = principal_angles(g, A, B).front();
    res.checks.push_back(make_check("small angle without cancellation", std::abs(a - 1e-9) / 1e-9, 1e-6, ""));
  }
  return res;
}

}  // namespace

SuiteResult run_point_suite(const std::string& name, std::uint64_t seed) {
  if (name == "curvature") return suite_curvature(seed);
  if (name == "nullity") return suite_nullity(seed);
  if (name == "riccati") return suite_riccati(seed);
  if (name == "cone-field") return suite_cone_field(seed);
  if (name == "divergence") return suite_divergence(seed);
  if (name == "holonomy") return suite_holonomy(seed);
  if (name == "jacobi") return suite_jacobi(seed);
  if (name == "transport") return suite_transport(seed);
  return {};
}

}  // namespace cn2
