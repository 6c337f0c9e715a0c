#include "builtins.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace cn2 {

namespace {

using expr::Expr;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  return v < 0 ? "(" + s + ")" : s;
}

Expr parse_in(const std::string& src, const std::vector<std::string>& coords) {
  return expr::parse(src, coords).root;
}

void collect_vars(const Expr& e, std::set<int>& out) {
  if (!e) return;
  if (e->kind == expr::NodeKind::Variable) out.insert(e->var);
  collect_vars(e->lhs, out);
  collect_vars(e->rhs, out);
}

double get_double(const ParamMap& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadParams, "parameter " + key + " is not a number: " + it->second);
  }
}

int get_int(const ParamMap& p, const std::string& key, int dflt) {
  double v = get_double(p, key, dflt);
  if (v != std::floor(v)) throw Error(ErrorCode::BadParams, "parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

void check_keys(const ParamMap& p, const std::set<std::string>& allowed, const std::string& family) {
  for (const auto& [k, v] : p)
    if (k != "scale" && !allowed.count(k)) throw Error(ErrorCode::BadParams, "unknown parameter '" + k + "' for " + family);
}

std::vector<std::pair<int, int>> parse_slopes(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    auto slash = item.find('/');
    try {
      if (slash == std::string::npos) {
        out.emplace_back(std::stoi(item), 1);
      } else {
        out.emplace_back(std::stoi(item.substr(0, slash)), std::stoi(item.substr(slash + 1)));
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadParams, "bad slope '" + item + "', expected p/q");
    }
  }
  return out;
}

std::shared_ptr<MetricField> diag_field(ChartSpec chart, const std::vector<std::string>& diag, std::string label) {
  const int n = chart.n;
  std::vector<Expr> comps(n * n);
  for (int i = 0; i < n; ++i)
    if (!diag[i].empty()) comps[i * n + i] = parse_in(diag[i], chart.coords);
  return MetricField::from_exprs(std::move(chart), std::move(comps), std::move(label));
}

// Layout shared by ex3 and ex4: blocks n = 1..N of width 2/2^n packed from x = -2,
// a flat filler around x = 0, and the mirror image on the positive side.
struct Slot {
  double x0, x1;
  int n;  // 0 for the filler
};

std::vector<Slot> accumulating_layout(int N) {
  std::vector<Slot> left;
  double x = -2.0;
  for (int n = 1; n <= N; ++n) {
    double w = 2.0 / std::ldexp(1.0, n);
    left.push_back({x, x + w, n});
    x += w;
  }
  std::vector<Slot> out = left;
  out.push_back({x, -x, 0});
  for (auto it = left.rbegin(); it != left.rend(); ++it) out.push_back({-it->x1, -it->x0, it->n});
  return out;
}

}  // namespace

ParamMap parse_params(const std::string& text) {
  ParamMap out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = item.find_last_not_of(" \t");
    item = item.substr(b, e - b + 1);
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::BadParams, "expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

const std::vector<BuiltinInfo>& builtin_list() {
  static const std::vector<BuiltinInfo> list = {
      {"flat", "n=3 length=2", "flat torus [0,length]^n"},
      {"flat2", "length=2", "flat 2-torus"},
      {"flat3", "length=2", "flat 3-torus"},
      {"flat4", "length=2", "flat 4-torus"},
      {"cone", "c=0.70710678118654757 r_min=0.5 r_max=4", "dr^2 + c^2 r^2 (dtheta^2 + sin^2 theta dphi^2), coords r,theta,phi"},
      {"sphere_product", "K=1", "round S^2 of curvature K times a flat circle of length 2, coords theta,phi,z"},
      {"sphere2", "", "unit round 2-sphere, coords theta,phi"},
      {"sphere3", "", "unit round 3-sphere, coords chi,theta,phi"},
      {"strip_cylinder", "eps=0.05 T=6 flat=0",
       "dr^2 + exp(-1/(1-r^2) - t^2) dt^2 on [-1+eps,1-eps]x[-T,T], times flat circles"},
      {"hypersurface_graph", "f=x^2/2+y^2/2 n=3", "induced metric delta_ij + f_i f_j of the graph of f"},
      {"ex1", "", "two perturbed cubes glued with orthogonal nullity, closed to a 3-torus"},
      {"ex2", "", "three perturbed slabs and two flat cubes closed to a 3-torus"},
      {"ex3", "N=3", "blocks of width 2/2^n with alternating nullity accumulating at a flat 2-torus, mirrored"},
      {"ex4", "N=3 slopes=1/2;2/3;3/4", "blocks perturbed along tubes around closed geodesics of the given slopes"},
  };
  return list;
}

std::shared_ptr<MetricField> make_block(const std::vector<double>& lo, const std::vector<double>& hi, int axis_a,
                                        int axis_b, const Expr& phi, double margin, const std::string& label) {
  const int n = static_cast<int>(lo.size());
  if (n < 2 || n > 4 || hi.size() != lo.size()) throw Error(ErrorCode::BadParams, "block dimension must be 2, 3 or 4");
  if (axis_a == axis_b || axis_a < 0 || axis_b < 0 || axis_a >= n || axis_b >= n)
    throw Error(ErrorCode::BadParams, "invalid surface axes");
  ChartSpec chart = ChartSpec::box(default_coords(n), lo, hi);
  for (int s : {axis_a, axis_b})
    if (!(margin > 0.0) || 2 * margin >= chart.width(s))
      throw Error(ErrorCode::BadParams, "margin must be positive and below half the block width");
  std::set<int> vars;
  collect_vars(phi, vars);
  for (int v : vars)
    if (v != axis_a && v != axis_b)
      throw Error(ErrorCode::BadParams, "perturbation depends on a non-surface coordinate");

  // Collar sampling: a regular grid over the surface box, refined until at
  // least 10^4 samples land in the collar.
  Vec p = (chart.lo + chart.hi) / 2;
  std::span<const double> pt(p.data(), n);
  int count = 0;
  for (int K = 200; count < 10000 && K <= 3200; K *= 2) {
    count = 0;
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= K; ++j) {
        double u = chart.lo[axis_a] + chart.width(axis_a) * i / K;
        double v = chart.lo[axis_b] + chart.width(axis_b) * j / K;
        bool in_collar = u <= chart.lo[axis_a] + margin || u >= chart.hi[axis_a] - margin ||
                         v <= chart.lo[axis_b] + margin || v >= chart.hi[axis_b] - margin;
        if (!in_collar) continue;
        ++count;
        p[axis_a] = u;
        p[axis_b] = v;
        double val = expr::eval(phi, pt);
        if (!(std::abs(val) < 1e-15)) {
          std::ostringstream os;
          os.precision(6);
          os << "perturbation is " << val << " at (" << u << ", " << v << ") inside the margin collar";
          throw Error(ErrorCode::SupportViolation, os.str());
        }
      }
  }
  std::vector<Expr> comps(n * n);
  if (!expr::is_constant(phi) || expr::eval(phi, pt) != 0.0) {
    Expr conf = expr::call(expr::Function::Exp, expr::mul(expr::constant(2.0), phi));
    comps[axis_a * n + axis_a] = conf;
    comps[axis_b * n + axis_b] = conf;
  }
  return MetricField::from_exprs(std::move(chart), std::move(comps), label);
}

std::shared_ptr<MetricField> make_block(const std::vector<double>& half_widths, const std::string& phi,
                                        double margin) {
  const int n = static_cast<int>(half_widths.size());
  if (n < 2 || n > 4) throw Error(ErrorCode::BadParams, "block dimension must be 2, 3 or 4");
  std::vector<double> lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    if (!(half_widths[i] > 0)) throw Error(ErrorCode::BadParams, "half widths must be positive");
    lo[i] = -half_widths[i];
    hi[i] = half_widths[i];
  }
  return make_block(lo, hi, 0, 1, parse_in(phi, default_coords(n)), margin, "block");
}

std::shared_ptr<MetricField> scaled_field(const MetricField& f, double lambda) {
  const int n = f.dim();
  if (!f.is_expr()) throw Error(ErrorCode::BadParams, "only expression metrics can be scaled");
  Expr l2 = expr::constant(lambda * lambda);
  std::vector<Expr> comps(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Expr& c = f.component(i, j);
      if (c) {
        comps[i * n + j] = expr::mul(l2, c);
      } else if (i == j) {
        comps[i * n + j] = l2;
      }
    }
  return MetricField::from_exprs(f.chart(), std::move(comps), f.label());
}

Atlas make_flat(int n, double length) {
  if (n < 2 || n > 4) throw Error(ErrorCode::BadParams, "flat: n must be 2, 3 or 4");
  if (!(length > 0)) throw Error(ErrorCode::BadParams, "flat: length must be positive");
  ChartSpec c = ChartSpec::box(default_coords(n), std::vector<double>(n, 0.0), std::vector<double>(n, length),
                               {true, true, true, true});
  auto f = MetricField::from_exprs(std::move(c), std::vector<Expr>(n * n), "flat" + std::to_string(n));
  return Atlas::from_field(f);
}

Atlas make_cone(double c, double r_min, double r_max) {
  if (!(c > 0) || !(r_min > 0) || !(r_max > r_min)) throw Error(ErrorCode::BadParams, "cone: need c > 0, 0 < r_min < r_max");
  const double pi = std::numbers::pi;
  ChartSpec chart = ChartSpec::box({"r", "theta", "phi"}, {r_min, 0.1, 0.0}, {r_max, pi - 0.1, 2 * pi},
                                   {false, false, true});
  std::string c2 = num(c * c);
  return Atlas::from_field(diag_field(std::move(chart), {"", c2 + "*r^2", c2 + "*r^2*sin(theta)^2"}, "cone"));
}

Atlas make_sphere_product(double K) {
  if (!(K > 0)) throw Error(ErrorCode::BadParams, "sphere_product: K must be positive");
  const double pi = std::numbers::pi;
  ChartSpec chart = ChartSpec::box({"theta", "phi", "z"}, {0.1, 0.0, 0.0}, {pi - 0.1, 2 * pi, 2.0},
                                   {false, true, true});
  std::string k = num(1.0 / K);
  return Atlas::from_field(diag_field(std::move(chart), {K == 1.0 ? "" : k, k + "*sin(theta)^2", ""}, "sphere_product"));
}

Atlas make_sphere2() {
  const double pi = std::numbers::pi;
  ChartSpec chart = ChartSpec::box({"theta", "phi"}, {1e-6, 0.0}, {pi - 1e-6, 2 * pi}, {false, true});
  return Atlas::from_field(diag_field(std::move(chart), {"", "sin(theta)^2"}, "sphere2"));
}

Atlas make_sphere3() {
  const double pi = std::numbers::pi;
  ChartSpec chart = ChartSpec::box({"chi", "theta", "phi"}, {0.1, 0.1, 0.0}, {pi - 0.1, pi - 0.1, 2 * pi},
                                   {false, false, true});
  return Atlas::from_field(
      diag_field(std::move(chart), {"", "sin(chi)^2", "sin(chi)^2*sin(theta)^2"}, "sphere3"));
}

Atlas make_strip_cylinder(double eps, double T, int flat_dims) {
  if (!(eps > 0 && eps < 1) || !(T > 0) || flat_dims < 0 || flat_dims > 2)
    throw Error(ErrorCode::BadParams, "strip_cylinder: need 0 < eps < 1, T > 0, flat in {0,1,2}");
  std::vector<std::string> coords = {"r", "t"};
  std::vector<double> lo = {-1 + eps, -T}, hi = {1 - eps, T};
  std::array<bool, 4> per{false, false, true, true};
  const char* extra[] = {"z", "w"};
  for (int k = 0; k < flat_dims; ++k) {
    coords.emplace_back(extra[k]);
    lo.push_back(0.0);
    hi.push_back(2.0);
  }
  ChartSpec chart = ChartSpec::box(coords, lo, hi, per);
  std::vector<std::string> diag(chart.n);
  diag[1] = "exp(-1/(1-r^2)-t^2)";
  return Atlas::from_field(diag_field(std::move(chart), diag, "strip_cylinder"));
}

Atlas make_hypersurface_graph(const std::string& f, int n) {
  if (n < 2 || n > 4) throw Error(ErrorCode::BadParams, "hypersurface_graph: n must be 2, 3 or 4");
  auto coords = default_coords(n);
  Expr fe = parse_in(f, coords);
  std::vector<Expr> grad(n);
  for (int i = 0; i < n; ++i) grad[i] = expr::derivative(fe, i);
  std::vector<Expr> comps(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Expr prod = expr::mul(grad[i], grad[j]);
      Expr c = i == j ? expr::add(expr::constant(1.0), prod) : prod;
      if (expr::is_constant(c) && expr::eval(c, std::span<const double>()) == (i == j ? 1.0 : 0.0)) continue;
      comps[i * n + j] = c;
      comps[j * n + i] = c;
    }
  ChartSpec chart = ChartSpec::box(coords, std::vector<double>(n, -2.0), std::vector<double>(n, 2.0));
  return Atlas::from_field(MetricField::from_exprs(std::move(chart), std::move(comps), "hypersurface_graph"));
}

Atlas make_ex1() {
  const std::vector<double> lo = {-1, -1, -1}, hi = {1, 1, 1};
  auto coords = default_coords(3);
  Expr phi = parse_in("0.3*bump(x/0.75)*bump(y/0.75)", coords);
  Atlas at;
  at.dim = 3;
  at.label = "ex1";
  at.margin = 0.25;
  at.blocks.push_back({make_block(lo, hi, 0, 1, phi, 0.25, "A"), Vec::Zero(3), "A", 2});
  Vec off(3);
  off << 2, 0, 0;
  at.blocks.push_back({make_block(lo, hi, 0, 1, phi, 0.25, "B"), off, "B", 2});
  Vec shift(3);
  shift << -2, 0, 0;
  // Quarter turn about x: B's nullity axis lies along A's y axis.
  at.add_glue({0, 0, 1}, {1, 0, 0}, {0, 2, 1, 3}, {1, 1, -1, 1}, shift);
  at.add_glue({1, 0, 1}, {0, 0, 0}, {0, 2, 1, 3}, {1, -1, 1, 1}, shift);
  for (int b = 0; b < 2; ++b)
    for (int a = 1; a < 3; ++a) {
      Vec s = Vec::Zero(3);
      s[a] = -2;
      at.add_glue({b, a, 1}, {b, a, 0}, {0, 1, 2, 3}, {1, 1, 1, 1}, s);
    }
  return at;
}

Atlas make_ex2() {
  auto coords = default_coords(3);
  Atlas at;
  at.dim = 3;
  at.label = "ex2";
  at.margin = 0.25;
  struct Spec {
    const char* name;
    std::vector<double> lo, hi;
    int a, b, nullity;
    const char* phi;
  };
  const Spec specs[] = {
      {"S1", {0, 0, 0}, {2, 2, 4}, 0, 1, 2, "0.3*bump((x-1)/0.75)*bump((y-1)/0.75)"},
      {"S2", {2, 0, 0}, {4, 4, 2}, 0, 2, 1, "0.3*bump((x-3)/0.75)*bump((z-1)/0.75)"},
      {"S3", {0, 2, 2}, {4, 4, 4}, 1, 2, 0, "0.3*bump((y-3)/0.75)*bump((z-3)/0.75)"},
      {"F1", {0, 2, 0}, {2, 4, 2}, 0, 1, -1, "0"},
      {"F2", {2, 0, 2}, {4, 2, 4}, 0, 1, -1, "0"},
  };
  for (const Spec& s : specs) {
    auto f = make_block(s.lo, s.hi, s.a, s.b, parse_in(s.phi, coords), 0.25, s.name);
    at.blocks.push_back({f, Vec::Map(s.lo.data(), 3), s.name, s.nullity});
  }
  Vec glo = Vec::Zero(3), ghi = Vec::Constant(3, 4.0);
  at.glue_by_placement(glo, ghi);
  return at;
}

Atlas make_ex3(int N) {
  if (N < 1 || N > 12) throw Error(ErrorCode::BadParams, "ex3: N must be between 1 and 12");
  auto coords = default_coords(3);
  Atlas at;
  at.dim = 3;
  at.label = "ex3";
  at.margin = 0.25 / std::ldexp(1.0, N);
  for (const Slot& s : accumulating_layout(N)) {
    std::vector<double> lo = {s.x0, -1, -1}, hi = {s.x1, 1, 1};
    std::string name;
    if (s.n == 0) {
      name = "filler";
      at.blocks.push_back({make_block(lo, hi, 0, 1, expr::constant(0.0), 0.25 * (s.x1 - s.x0), name),
                           Vec::Map(lo.data(), 3), name, -1});
      continue;
    }
    name = (s.x0 < 0 ? "L" : "R") + std::to_string(s.n);
    double hw = (s.x1 - s.x0) / 2, xc = (s.x0 + s.x1) / 2;
    bool z_nullity = s.n % 2 == 1;
    std::string w = z_nullity ? "y" : "z";
    std::string phi = num(0.3 * hw) + "*bump((x-" + num(xc) + ")/" + num(0.75 * hw) + ")*bump(" + w + "/0.75)";
    auto f = make_block(lo, hi, 0, z_nullity ? 1 : 2, parse_in(phi, coords), 0.25 * hw, name);
    at.blocks.push_back({f, Vec::Map(lo.data(), 3), name, z_nullity ? 2 : 1});
  }
  Vec glo(3), ghi(3);
  glo << -2, -1, -1;
  ghi << 2, 1, 1;
  at.glue_by_placement(glo, ghi);
  return at;
}

Atlas make_ex4(int N, const std::vector<std::pair<int, int>>& slopes) {
  if (N < 1 || N > 12) throw Error(ErrorCode::BadParams, "ex4: N must be between 1 and 12");
  if (static_cast<int>(slopes.size()) != N)
    throw Error(ErrorCode::BadParams, "ex4: expected " + std::to_string(N) + " slopes, got " + std::to_string(slopes.size()));
  auto coords = default_coords(3);
  Atlas at;
  at.dim = 3;
  at.label = "ex4";
  at.margin = 0.25 / std::ldexp(1.0, N);
  const double pi = std::numbers::pi;
  for (const Slot& s : accumulating_layout(N)) {
    std::vector<double> lo = {s.x0, -1, -1}, hi = {s.x1, 1, 1};
    if (s.n == 0) {
      at.blocks.push_back({MetricField::from_exprs(ChartSpec::box(coords, lo, hi), std::vector<Expr>(9), "filler"),
                           Vec::Map(lo.data(), 3), "filler", -1});
      continue;
    }
    std::string name = (s.x0 < 0 ? "L" : "R") + std::to_string(s.n);
    auto [p, q] = slopes[s.n - 1];
    if (q == 0 && p == 0) throw Error(ErrorCode::BadParams, "ex4: slope 0/0");
    if (std::gcd(p, q) != 1) throw Error(ErrorCode::BadParams, "ex4: slope p/q must be in lowest terms");
    // gamma runs along (q, p) in the (y, z) torus of side 2; its lifts are
    // lines spaced d apart, and u is the signed distance normal to them.
    double len = std::hypot(double(p), double(q));
    double d = 2.0 / len;
    double ny = -p / len, nz = q / len;
    double xc = (s.x0 + s.x1) / 2;
    double rho_x = 1.0 / std::ldexp(1.0, 2 * s.n);
    std::string u = "(" + num(ny) + "*y+" + num(nz) + "*z)";
    std::string phi = num(0.3 * rho_x) + "*bump((x-" + num(xc) + ")/" + num(rho_x) + ")*bump(sin(" + num(pi / d) +
                      "*" + u + ")/" + num(std::sin(0.4 * pi)) + ")";
    Expr ph = parse_in(phi, coords);
    Expr e = expr::sub(expr::call(expr::Function::Exp, expr::mul(expr::constant(2.0), ph)), expr::constant(1.0));
    std::vector<Expr> comps(9);
    comps[0] = expr::add(expr::constant(1.0), e);
    comps[4] = expr::add(expr::constant(1.0), expr::mul(expr::constant(ny * ny), e));
    comps[8] = expr::add(expr::constant(1.0), expr::mul(expr::constant(nz * nz), e));
    comps[5] = comps[7] = expr::mul(expr::constant(ny * nz), e);
    auto f = MetricField::from_exprs(ChartSpec::box(coords, lo, hi), std::move(comps), name);
    at.blocks.push_back({f, Vec::Map(lo.data(), 3), name, -1});
  }
  Vec glo(3), ghi(3);
  glo << -2, -1, -1;
  ghi << 2, 1, 1;
  at.glue_by_placement(glo, ghi);
  return at;
}

Atlas make_builtin(const std::string& name, const ParamMap& params) {
  Atlas at;
  if (name == "flat") {
    check_keys(params, {"n", "length"}, name);
    at = make_flat(get_int(params, "n", 3), get_double(params, "length", 2.0));
  } else if (name == "flat2" || name == "flat3" || name == "flat4") {
    check_keys(params, {"length"}, name);
    at = make_flat(name[4] - '0', get_double(params, "length", 2.0));
  } else if (name == "cone") {
    check_keys(params, {"c", "r_min", "r_max"}, name);
    at = make_cone(get_double(params, "c", std::sqrt(0.5)), get_double(params, "r_min", 0.5),
                   get_double(params, "r_max", 4.0));
  } else if (name == "sphere_product") {
    check_keys(params, {"K"}, name);
    at = make_sphere_product(get_double(params, "K", 1.0));
  } else if (name == "sphere2") {
    check_keys(params, {}, name);
    at = make_sphere2();
  } else if (name == "sphere3") {
    check_keys(params, {}, name);
    at = make_sphere3();
  } else if (name == "strip_cylinder") {
    check_keys(params, {"eps", "T", "flat"}, name);
    at = make_strip_cylinder(get_double(params, "eps", 0.05), get_double(params, "T", 6.0), get_int(params, "flat", 0));
  } else if (name == "hypersurface_graph") {
    check_keys(params, {"f", "n"}, name);
    auto it = params.find("f");
    at = make_hypersurface_graph(it == params.end() ? "x^2/2+y^2/2" : it->second, get_int(params, "n", 3));
  } else if (name == "ex1") {
    check_keys(params, {}, name);
    at = make_ex1();
  } else if (name == "ex2") {
    check_keys(params, {}, name);
    at = make_ex2();
  } else if (name == "ex3") {
    check_keys(params, {"N"}, name);
    at = make_ex3(get_int(params, "N", 3));
  } else if (name == "ex4") {
    check_keys(params, {"N", "slopes"}, name);
    int N = get_int(params, "N", 3);
    std::vector<std::pair<int, int>> slopes;
    auto it = params.find("slopes");
    if (it != params.end()) {
      slopes = parse_slopes(it->second);
    } else {
      for (int n = 1; n <= N; ++n) slopes.emplace_back(n, n + 1);
    }
    at = make_ex4(N, slopes);
  } else {
    throw Error(ErrorCode::BadParams, "unknown builtin '" + name + "'");
  }
  auto sc = params.find("scale");
  if (sc != params.end()) {
    double lambda = get_double(params, "scale", 1.0);
    if (!(lambda > 0)) throw Error(ErrorCode::BadParams, "scale must be positive");
    for (auto& b : at.blocks) b.field = scaled_field(*b.field, lambda);
  }
  return at;
}

}  // namespace cn2
