#include "expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace cn2::expr {

const char* function_name(Function fn) {
  switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Tan: return "tan";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Tanh: return "tanh";
    case Function::Abs: return "abs";
    case Function::Bump: return "bump";
    case Function::BumpDeriv: return "bump_d";
    case Function::Sign: return "sign";
  }
  return "?";
}

namespace {

constexpr std::array<Function, 9> kParsable = {Function::Sin,  Function::Cos,  Function::Tan,
                                               Function::Exp,  Function::Log,  Function::Sqrt,
                                               Function::Tanh, Function::Abs,  Function::Bump};

Expr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

// ---------------------------------------------------------------------------
// Recursive-descent parser. Positions are 1-based byte offsets.

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& coords) : src_(src), coords_(coords) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail("end of input");
    return e;
  }

 private:
  std::string_view src_;
  const std::vector<std::string>& coords_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) const {
    std::string found = pos_ < src_.size() ? std::string("'") + src_[pos_] + "'" : "end of input";
    throw SyntaxError(pos_ + 1, expected,
                      "syntax error at offset " + std::to_string(pos_ + 1) + ": expected " + expected +
                          ", found " + found);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      skip_ws();
      std::size_t at = pos_ + 1;
      if (accept('+')) {
        lhs = make({.kind = NodeKind::Add, .lhs = lhs, .rhs = parse_term(), .offset = at});
      } else if (accept('-')) {
        lhs = make({.kind = NodeKind::Sub, .lhs = lhs, .rhs = parse_term(), .offset = at});
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      skip_ws();
      std::size_t at = pos_ + 1;
      if (accept('*')) {
        lhs = make({.kind = NodeKind::Mul, .lhs = lhs, .rhs = parse_factor(), .offset = at});
      } else if (accept('/')) {
        lhs = make({.kind = NodeKind::Div, .lhs = lhs, .rhs = parse_factor(), .offset = at});
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    skip_ws();
    std::size_t at = pos_ + 1;
    if (accept('-')) return make({.kind = NodeKind::Negate, .lhs = parse_factor(), .offset = at});
    Expr base = parse_base();
    skip_ws();
    at = pos_ + 1;
    if (accept('^')) {
      int k = parse_exponent();
      return make({.kind = NodeKind::Pow, .order = k, .lhs = base, .offset = at});
    }
    return base;
  }

  // integer ('^' exponent)?, evaluated right-associatively.
  int parse_exponent() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("nonnegative integer exponent");
    long v = std::stol(std::string(src_.substr(start, pos_ - start)));
    skip_ws();
    if (accept('^')) {
      int e = parse_exponent();
      long r = 1;
      for (int i = 0; i < e; ++i) {
        r *= v;
        if (r > 1'000'000) fail("exponent of reasonable size");
      }
      v = r;
    }
    if (v > 1'000'000) fail("exponent of reasonable size");
    return static_cast<int>(v);
  }

  Expr parse_base() {
    skip_ws();
    std::size_t at = pos_ + 1;
    if (pos_ >= src_.size()) fail("number, identifier or '('");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      std::string name(src_.substr(start, pos_ - start));
      skip_ws();
      if (pos_ < src_.size() && src_[pos_] == '(') {
        const Function* fn = nullptr;
        for (const auto& f : kParsable)
          if (name == function_name(f)) fn = &f;
        if (!fn) throw UnknownIdentifier(name);
        ++pos_;
        Expr arg = parse_expr();
        expect(')');
        return make({.kind = NodeKind::Call, .fn = *fn, .lhs = arg, .offset = at});
      }
      for (std::size_t i = 0; i < coords_.size(); ++i)
        if (coords_[i] == name) return make({.kind = NodeKind::Variable, .var = static_cast<int>(i), .offset = at});
      if (name == "pi") return make({.kind = NodeKind::Constant, .value = std::numbers::pi, .offset = at});
      throw UnknownIdentifier(name);
    }
    if (accept('(')) {
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    fail("number, identifier or '('");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail("number");
    }
    return make({.kind = NodeKind::Constant, .value = std::stod(text), .offset = start + 1});
  }
};

[[noreturn]] void domain_error(const Node& n, const std::string& what) {
  std::string where = n.offset ? " at offset " + std::to_string(n.offset) : "";
  throw Error(ErrorCode::Domain, what + where);
}

double apply(const Node& n, double u) {
  switch (n.fn) {
    case Function::Sin: return std::sin(u);
    case Function::Cos: return std::cos(u);
    case Function::Tan: return std::tan(u);
    case Function::Exp: return std::exp(u);
    case Function::Log:
      if (!(u > 0.0)) domain_error(n, "log of nonpositive value");
      return std::log(u);
    case Function::Sqrt:
      if (u < 0.0) domain_error(n, "sqrt of negative value");
      return std::sqrt(u);
    case Function::Tanh: return std::tanh(u);
    case Function::Abs: return std::abs(u);
    case Function::Bump: return bump(u);
    case Function::BumpDeriv: {
      std::array<double, 9> d{};
      bump_derivatives(u, n.order, d);
      return d[n.order];
    }
    case Function::Sign: return u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
  }
  return 0.0;
}

// f, f', f'' of the call's function at u.
std::array<double, 3> apply2(const Node& n, double u) {
  switch (n.fn) {
    case Function::Sin: return {std::sin(u), std::cos(u), -std::sin(u)};
    case Function::Cos: return {std::cos(u), -std::sin(u), -std::cos(u)};
    case Function::Tan: {
      double t = std::tan(u), s = 1.0 + t * t;
      return {t, s, 2.0 * t * s};
    }
    case Function::Exp: {
      double e = std::exp(u);
      return {e, e, e};
    }
    case Function::Log:
      if (!(u > 0.0)) domain_error(n, "log of nonpositive value");
      return {std::log(u), 1.0 / u, -1.0 / (u * u)};
    case Function::Sqrt: {
      if (!(u > 0.0)) domain_error(n, "sqrt not differentiable at nonpositive value");
      double r = std::sqrt(u);
      return {r, 0.5 / r, -0.25 / (r * u)};
    }
    case Function::Tanh: {
      double t = std::tanh(u), s = 1.0 - t * t;
      return {t, s, -2.0 * t * s};
    }
    case Function::Abs: return {std::abs(u), u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0), 0.0};
    case Function::Bump: {
      std::array<double, 9> d{};
      bump_derivatives(u, 2, d);
      return {d[0], d[1], d[2]};
    }
    case Function::BumpDeriv: {
      std::array<double, 9> d{};
      bump_derivatives(u, n.order + 2, d);
      return {d[n.order], d[n.order + 1], d[n.order + 2]};
    }
    case Function::Sign: return {u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0), 0.0, 0.0};
  }
  return {0, 0, 0};
}

// ---------------------------------------------------------------------------
// Jet arithmetic.

Jet2 jet_const(int n, double v) {
  Jet2 j;
  j.n = n;
  j.value = v;
  return j;
}

Jet2 jet_compose(const Jet2& u, const std::array<double, 3>& f) {
  Jet2 r = jet_const(u.n, f[0]);
  for (int i = 0; i < u.n; ++i) r.grad[i] = f[1] * u.grad[i];
  for (int i = 0; i < u.n; ++i)
    for (int k = 0; k < u.n; ++k) r.h(i, k) = f[1] * u.h(i, k) + f[2] * u.grad[i] * u.grad[k];
  return r;
}

Jet2 jet_add(const Jet2& a, const Jet2& b, double sb) {
  Jet2 r = jet_const(a.n, a.value + sb * b.value);
  for (int i = 0; i < a.n; ++i) r.grad[i] = a.grad[i] + sb * b.grad[i];
  for (std::size_t i = 0; i < r.hess.size(); ++i) r.hess[i] = a.hess[i] + sb * b.hess[i];
  return r;
}

Jet2 jet_mul(const Jet2& a, const Jet2& b) {
  Jet2 r = jet_const(a.n, a.value * b.value);
  for (int i = 0; i < a.n; ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  for (int i = 0; i < a.n; ++i)
    for (int k = 0; k < a.n; ++k)
      r.h(i, k) = a.value * b.h(i, k) + b.value * a.h(i, k) + a.grad[i] * b.grad[k] + b.grad[i] * a.grad[k];
  return r;
}

Jet2 jet_eval(const Node& node, int n, std::span<const double> p) {
  switch (node.kind) {
    case NodeKind::Constant: return jet_const(n, node.value);
    case NodeKind::Variable: {
      Jet2 j = jet_const(n, p[node.var]);
      j.grad[node.var] = 1.0;
      return j;
    }
    case NodeKind::Negate: {
      Jet2 a = jet_eval(*node.lhs, n, p);
      return jet_add(jet_const(n, 0.0), a, -1.0);
    }
    case NodeKind::Add: return jet_add(jet_eval(*node.lhs, n, p), jet_eval(*node.rhs, n, p), 1.0);
    case NodeKind::Sub: return jet_add(jet_eval(*node.lhs, n, p), jet_eval(*node.rhs, n, p), -1.0);
    case NodeKind::Mul: return jet_mul(jet_eval(*node.lhs, n, p), jet_eval(*node.rhs, n, p));
    case NodeKind::Div: {
      Jet2 a = jet_eval(*node.lhs, n, p);
      Jet2 b = jet_eval(*node.rhs, n, p);
      if (b.value == 0.0) domain_error(node, "division by zero");
      double inv = 1.0 / b.value;
      return jet_mul(a, jet_compose(b, {inv, -inv * inv, 2.0 * inv * inv * inv}));
    }
    case NodeKind::Pow: {
      Jet2 u = jet_eval(*node.lhs, n, p);
      int k = node.order;
      if (k == 0) return jet_const(n, 1.0);
      double v = u.value;
      double pk2 = k >= 2 ? std::pow(v, k - 2) : 0.0;
      double pk1 = std::pow(v, k - 1);
      return jet_compose(u, {pk1 * v, k * pk1, k * (k - 1) * pk2});
    }
    case NodeKind::Call: {
      Jet2 u = jet_eval(*node.lhs, n, p);
      return jet_compose(u, apply2(node, u.value));
    }
  }
  return jet_const(n, 0.0);
}

double value_eval(const Node& node, std::span<const double> p) {
  switch (node.kind) {
    case NodeKind::Constant: return node.value;
    case NodeKind::Variable: return p[node.var];
    case NodeKind::Negate: return -value_eval(*node.lhs, p);
    case NodeKind::Add: return value_eval(*node.lhs, p) + value_eval(*node.rhs, p);
    case NodeKind::Sub: return value_eval(*node.lhs, p) - value_eval(*node.rhs, p);
    case NodeKind::Mul: return value_eval(*node.lhs, p) * value_eval(*node.rhs, p);
    case NodeKind::Div: {
      double b = value_eval(*node.rhs, p);
      if (b == 0.0) domain_error(node, "division by zero");
      return value_eval(*node.lhs, p) / b;
    }
    case NodeKind::Pow: {
      double v = value_eval(*node.lhs, p);
      double r = 1.0;
      for (int i = 0; i < node.order; ++i) r *= v;
      return r;
    }
    case NodeKind::Call: return apply(node, value_eval(*node.lhs, p));
  }
  return 0.0;
}

void check_point(int n, std::span<const double> p) {
  if (static_cast<int>(p.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "point has " + std::to_string(p.size()) +
                                                  " coordinates, expression expects " + std::to_string(n));
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_atom(const Node& n) {
  return n.kind == NodeKind::Variable || n.kind == NodeKind::Call ||
         (n.kind == NodeKind::Constant && n.value >= 0 && !std::signbit(n.value));
}

void print(const Node& n, std::span<const std::string> coords, std::string& out) {
  auto wrapped = [&](const Node& c) {
    if (is_atom(c)) {
      print(c, coords, out);
    } else {
      out += '(';
      print(c, coords, out);
      out += ')';
    }
  };
  switch (n.kind) {
    case NodeKind::Constant: out += format_number(n.value); return;
    case NodeKind::Variable:
      out += n.var < static_cast<int>(coords.size()) ? coords[n.var] : "x" + std::to_string(n.var);
      return;
    case NodeKind::Negate:
      out += '-';
      wrapped(*n.lhs);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      const char* op = n.kind == NodeKind::Add ? " + " : n.kind == NodeKind::Sub ? " - " : n.kind == NodeKind::Mul ? " * " : " / ";
      wrapped(*n.lhs);
      out += op;
      wrapped(*n.rhs);
      return;
    }
    case NodeKind::Pow:
      wrapped(*n.lhs);
      out += '^';
      out += std::to_string(n.order);
      return;
    case NodeKind::Call:
      out += function_name(n.fn);
      if (n.fn == Function::BumpDeriv) out += std::to_string(n.order);
      out += '(';
      print(*n.lhs, coords, out);
      out += ')';
      return;
  }
}

bool is_zero(const Expr& e) { return e->kind == NodeKind::Constant && e->value == 0.0; }
bool is_one(const Expr& e) { return e->kind == NodeKind::Constant && e->value == 1.0; }

}  // namespace

// ---------------------------------------------------------------------------

double bump(double s) {
  double w = 1.0 - s * s;
  if (!(w > 0.0)) return 0.0;
  return std::exp(1.0 - 1.0 / w);
}

// Taylor coefficients of exp(1 - 1/(1 - (s+e)^2)) in e, composed term by term.
void bump_derivatives(double s, int order, std::span<double> out) {
  if (order > 8) throw Error(ErrorCode::InvalidArgument, "bump derivative order above 8");
  for (int k = 0; k <= order; ++k) out[k] = 0.0;
  double w0 = 1.0 - s * s;
  if (!(w0 > 0.0)) return;
  double e0 = std::exp(1.0 - 1.0 / w0);
  if (e0 == 0.0) return;
  std::array<double, 9> w{}, inv{}, q{}, ex{};
  w[0] = w0;
  w[1] = -2.0 * s;
  w[2] = -1.0;
  for (int k = 0; k <= order; ++k) {
    double acc = k == 0 ? 1.0 : 0.0;
    for (int j = 1; j <= k; ++j) acc -= w[j] * inv[k - j];
    inv[k] = acc / w0;
  }
  q[0] = 1.0 - inv[0];
  for (int k = 1; k <= order; ++k) q[k] = -inv[k];
  ex[0] = e0;
  for (int k = 1; k <= order; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += j * q[j] * ex[k - j];
    ex[k] = acc / k;
  }
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) fact *= k;
    out[k] = ex[k] * fact;
  }
}

Ast parse(std::string_view source, std::vector<std::string> coords) {
  Parser p(source, coords);
  Expr root = p.parse_all();
  return Ast{std::move(root), std::move(coords)};
}

double eval(const Expr& e, std::span<const double> point) { return value_eval(*e, point); }

double eval(const Ast& ast, std::span<const double> point) {
  check_point(static_cast<int>(ast.coords.size()), point);
  return value_eval(*ast.root, point);
}

Jet2 eval_jet2(const Expr& e, int n, std::span<const double> point) {
  if (n > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "dimension above 4");
  return jet_eval(*e, n, point);
}

Jet2 eval_jet2(const Ast& ast, std::span<const double> point) {
  int n = static_cast<int>(ast.coords.size());
  check_point(n, point);
  return eval_jet2(ast.root, n, point);
}

std::string to_string(const Expr& e, std::span<const std::string> coords) {
  std::string out;
  print(*e, coords, out);
  return out;
}

std::string to_string(const Ast& ast) { return to_string(ast.root, ast.coords); }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Constant: return a->value == b->value;
    case NodeKind::Variable: return a->var == b->var;
    case NodeKind::Negate: return structurally_equal(a->lhs, b->lhs);
    case NodeKind::Pow: return a->order == b->order && structurally_equal(a->lhs, b->lhs);
    case NodeKind::Call:
      return a->fn == b->fn && a->order == b->order && structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
}

bool is_constant(const Expr& e) {
  switch (e->kind) {
    case NodeKind::Constant: return true;
    case NodeKind::Variable: return false;
    case NodeKind::Negate:
    case NodeKind::Pow:
    case NodeKind::Call: return is_constant(e->lhs);
    default: return is_constant(e->lhs) && is_constant(e->rhs);
  }
}

Expr constant(double v) { return make({.kind = NodeKind::Constant, .value = v}); }
Expr variable(int index) { return make({.kind = NodeKind::Variable, .var = index}); }
Expr negate(Expr a) {
  if (is_zero(a)) return a;
  return make({.kind = NodeKind::Negate, .lhs = std::move(a)});
}
Expr add(Expr a, Expr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return make({.kind = NodeKind::Add, .lhs = std::move(a), .rhs = std::move(b)});
}
Expr sub(Expr a, Expr b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return negate(std::move(b));
  return make({.kind = NodeKind::Sub, .lhs = std::move(a), .rhs = std::move(b)});
}
Expr mul(Expr a, Expr b) {
  if (is_zero(a) || is_zero(b)) return constant(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return make({.kind = NodeKind::Mul, .lhs = std::move(a), .rhs = std::move(b)});
}
Expr div(Expr a, Expr b) {
  if (is_zero(a)) return a;
  if (is_one(b)) return a;
  return make({.kind = NodeKind::Div, .lhs = std::move(a), .rhs = std::move(b)});
}
Expr pow(Expr a, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return a;
  return make({.kind = NodeKind::Pow, .order = exponent, .lhs = std::move(a)});
}
Expr call(Function fn, Expr a) { return make({.kind = NodeKind::Call, .fn = fn, .lhs = std::move(a)}); }

Expr derivative(const Expr& e, int var) {
  switch (e->kind) {
    case NodeKind::Constant: return constant(0.0);
    case NodeKind::Variable: return constant(e->var == var ? 1.0 : 0.0);
    case NodeKind::Negate: return negate(derivative(e->lhs, var));
    case NodeKind::Add: return add(derivative(e->lhs, var), derivative(e->rhs, var));
    case NodeKind::Sub: return sub(derivative(e->lhs, var), derivative(e->rhs, var));
    case NodeKind::Mul:
      return add(mul(derivative(e->lhs, var), e->rhs), mul(e->lhs, derivative(e->rhs, var)));
    case NodeKind::Div: {
      Expr num = sub(mul(derivative(e->lhs, var), e->rhs), mul(e->lhs, derivative(e->rhs, var)));
      return div(num, pow(e->rhs, 2));
    }
    case NodeKind::Pow:
      return mul(mul(constant(e->order), pow(e->lhs, e->order - 1)), derivative(e->lhs, var));
    case NodeKind::Call: {
      Expr du = derivative(e->lhs, var);
      if (is_zero(du)) return du;
      const Expr& u = e->lhs;
      Expr outer;
      switch (e->fn) {
        case Function::Sin: outer = call(Function::Cos, u); break;
        case Function::Cos: outer = negate(call(Function::Sin, u)); break;
        case Function::Tan: outer = add(constant(1.0), pow(call(Function::Tan, u), 2)); break;
        case Function::Exp: outer = call(Function::Exp, u); break;
        case Function::Log: outer = div(constant(1.0), u); break;
        case Function::Sqrt: outer = div(constant(0.5), call(Function::Sqrt, u)); break;
        case Function::Tanh: outer = sub(constant(1.0), pow(call(Function::Tanh, u), 2)); break;
        case Function::Abs: outer = call(Function::Sign, u); break;
        case Function::Bump: outer = make({.kind = NodeKind::Call, .order = 1, .fn = Function::BumpDeriv, .lhs = u}); break;
        case Function::BumpDeriv:
          outer = make({.kind = NodeKind::Call, .order = e->order + 1, .fn = Function::BumpDeriv, .lhs = u});
          break;
        case Function::Sign: return constant(0.0);
      }
      return mul(outer, du);
    }
  }
  return constant(0.0);
}

}  // namespace cn2::expr
