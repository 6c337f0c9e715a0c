#pragma once

// Scalar-field expressions over a chart's coordinates, with exact value,
// gradient and Hessian through second-order forward-mode AD.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace cn2::expr {

inline constexpr int kMaxDim = 4;

enum class NodeKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

// Bump and Sign derivatives never come out of the parser; they appear only in
// trees produced by derivative().
enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Tanh, Abs, Bump, BumpDeriv, Sign };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;      // Constant
  int var = -1;            // Variable: coordinate index
  int order = 0;           // Pow: integer exponent; Call(BumpDeriv): derivative order
  Function fn = Function::Sin;
  Expr lhs{};              // unary operand / left operand
  Expr rhs{};
  std::size_t offset = 0;  // 1-based byte position in the source, 0 if synthesized
};

/// Parsed expression plus the coordinate names its variables index into.
struct Ast {
  Expr root;
  std::vector<std::string> coords;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& expected, const std::string& what)
      : Error(ErrorCode::Syntax, what), offset_(offset), expected_(expected) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& name)
      : Error(ErrorCode::UnknownIdentifier, "unknown identifier '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Value, gradient and Hessian at a point. Only the leading n entries (n x n
/// block of the Hessian, row-major with stride kMaxDim) are meaningful.
struct Jet2 {
  int n = 0;
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  std::array<double, kMaxDim * kMaxDim> hess{};

  double h(int i, int j) const { return hess[i * kMaxDim + j]; }
  double& h(int i, int j) { return hess[i * kMaxDim + j]; }
};

Ast parse(std::string_view source, std::vector<std::string> coords);

double eval(const Ast& ast, std::span<const double> point);
double eval(const Expr& e, std::span<const double> point);

Jet2 eval_jet2(const Ast& ast, std::span<const double> point);
Jet2 eval_jet2(const Expr& e, int n, std::span<const double> point);

/// Fully determined textual form; parse(to_string(a)) is structurally equal to a.
std::string to_string(const Ast& ast);
std::string to_string(const Expr& e, std::span<const std::string> coords);

bool structurally_equal(const Expr& a, const Expr& b);

/// Symbolic partial derivative with respect to coordinate `var` (no simplification
/// beyond folding literal zeros and ones).
Expr derivative(const Expr& e, int var);

bool is_constant(const Expr& e);

// Tree builders.
Expr constant(double v);
Expr variable(int index);
Expr negate(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, int exponent);
Expr call(Function fn, Expr a);

/// Smooth compactly supported profile exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere.
double bump(double s);

/// Derivatives bump^(k)(s) for k = 0..order (order <= 8), written into out.
void bump_derivatives(double s, int order, std::span<double> out);

const char* function_name(Function fn);

}  // namespace cn2::expr
