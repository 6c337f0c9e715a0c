#pragma once

// Shared helpers of the verification suites.

#include <random>
#include <string>

#include "verify.hpp"

namespace cn2 {
namespace verify_detail {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uni(double a, double b);
  int pick(int n);
  Vec unit(int n);
};

/// Uniform in the block box shrunk by `inset` of each width on both sides.
Vec random_point(const Atlas& at, int block, Rng& rng, double inset = 0.0);

Check make_check(std::string name, double value, double tol, std::string detail);
Check bool_check(std::string name, bool ok, std::string detail);
std::string num(double x);
double line_angle(const Mat& g, const Vec& a, const Vec& b);

}  // namespace verify_detail

/// Empty result for names that are not pointwise suites.
SuiteResult run_point_suite(const std::string& name, std::uint64_t seed);

}  // namespace cn2
