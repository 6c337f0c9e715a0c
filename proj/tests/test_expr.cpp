#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "expr.hpp"

using namespace cn2;
using namespace cn2::expr;

namespace {

std::vector<std::string> xy() { return {"x", "y"}; }

}  // namespace

TEST(Expr, EvaluatesArithmeticWithPrecedence) {
  Ast a = parse("1 + 2*x^2 - y/4", xy());
  std::vector<double> p{3.0, 2.0};
  EXPECT_DOUBLE_EQ(eval(a, p), 1 + 18 - 0.5);
  EXPECT_DOUBLE_EQ(eval(parse("-x^2", xy()), p), -9.0);
  EXPECT_DOUBLE_EQ(eval(parse("2^3^2", xy()), p), 512.0);
}

TEST(Expr, FunctionsAndConstants) {
  std::vector<double> p{0.3, 0.0};
  EXPECT_NEAR(eval(parse("sin(x)^2 + cos(x)^2", xy()), p), 1.0, 1e-15);
  EXPECT_NEAR(eval(parse("exp(log(x))", xy()), p), 0.3, 1e-15);
  EXPECT_NEAR(eval(parse("tanh(x) + abs(y - 1)", xy()), p), std::tanh(0.3) + 1.0, 1e-15);
  EXPECT_NEAR(eval(parse("pi", xy()), p), M_PI, 1e-15);
}

// Oracle: d/dx exp(xy) = y e^{xy}, d2/dxdy = (1 + xy) e^{xy}; at (1,2) with e^2.
TEST(Expr, JetOfExpXYMatchesClosedForm) {
  Jet2 j = eval_jet2(parse("exp(x*y)", xy()), std::vector<double>{1.0, 2.0});
  EXPECT_NEAR(j.value, 7.389056098930650, 1e-14);
  EXPECT_NEAR(j.grad[0], 14.778112197861300, 1e-13);
  EXPECT_NEAR(j.grad[1], 7.389056098930650, 1e-13);
  EXPECT_NEAR(j.h(0, 0), 29.556224395722601, 1e-12);
  EXPECT_NEAR(j.h(0, 1), 22.167168296791951, 1e-12);
  EXPECT_NEAR(j.h(1, 0), 22.167168296791951, 1e-12);
  EXPECT_NEAR(j.h(1, 1), 7.389056098930650, 1e-12);
}

TEST(Expr, JetAgreesWithSymbolicDerivative) {
  Ast a = parse("sin(x*y) / (2 + cos(x)) + sqrt(1 + y^2) * bump(x/3)", xy());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p{u(rng), u(rng)};
    Jet2 j = eval_jet2(a, p);
    for (int i = 0; i < 2; ++i) {
      Expr di = derivative(a.root, i);
      EXPECT_NEAR(j.grad[i], eval(di, p), 1e-12);
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(j.h(i, k), eval(derivative(di, k), p), 1e-11);
    }
  }
}

TEST(Expr, SyntaxErrorsCarryOneBasedOffset) {
  try {
    parse("x + * y", xy());
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_EQ(e.code(), ErrorCode::Syntax);
  }
  EXPECT_THROW(parse("(x + y", xy()), SyntaxError);
  EXPECT_THROW(parse("", xy()), SyntaxError);
}

TEST(Expr, UnknownIdentifierNamesTheSymbol) {
  try {
    parse("x + z", xy());
    FAIL();
  } catch (const UnknownIdentifier& e) {
    EXPECT_EQ(e.name(), "z");
  }
  EXPECT_THROW(parse("frob(x)", xy()), UnknownIdentifier);
}

TEST(Expr, DomainErrors) {
  std::vector<double> p{-1.0, 0.0};
  try {
    eval(parse("log(x)", xy()), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Domain);
  }
  EXPECT_THROW(eval(parse("1/y", xy()), p), Error);
  EXPECT_THROW(eval(parse("sqrt(x)", xy()), p), Error);
}

TEST(Expr, PrintedFormReparsesToTheSameTree) {
  for (const char* src : {"x^2*y - 3/(1 + exp(-x))", "-(x - y)^3", "bump(x/0.75)*bump(y/0.75)", "2^3^2",
                          "x - (y - 1)", "1e-3*tan(x)"}) {
    Ast a = parse(src, xy());
    Ast b = parse(to_string(a), xy());
    EXPECT_TRUE(structurally_equal(a.root, b.root)) << src << " -> " << to_string(a);
  }
}

TEST(Expr, BumpIsCompactlySupportedAndSmooth) {
  EXPECT_DOUBLE_EQ(bump(0.0), 1.0);
  EXPECT_EQ(bump(1.0), 0.0);
  EXPECT_EQ(bump(-1.5), 0.0);
  std::array<double, 9> d{};
  bump_derivatives(0.999, 8, d);
  for (double v : d) EXPECT_LT(std::abs(v), 1e-100);
  const double s = 0.4, h = 1e-5;
  bump_derivatives(s, 2, d);
  EXPECT_NEAR(d[1], (bump(s + h) - bump(s - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(d[2], (bump(s + h) - 2 * bump(s) + bump(s - h)) / (h * h), 1e-4);
}
