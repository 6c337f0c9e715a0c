#pragma once

// Named invariant suites. Randomized suites draw from a seeded mt19937_64, so
// a fixed seed reproduces a run exactly.

#include <cstdint>
#include <string>
#include <vector>

#include "graph.hpp"

namespace cn2 {

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;  // worst observed quantity
  double tol = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Check> checks;

  int passed() const;
  int failed() const;
  bool ok() const { return failed() == 0; }
  std::string to_json() const;
};

struct SuiteInfo {
  std::string name;
  std::string summary;
};

const std::vector<SuiteInfo>& suite_list();

/// Throws InvalidArgument for unknown names.
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 42, int threads = 1);

/// The four grid runs behind the end-to-end detection check: ex1 and ex2 at
/// h = 1/16, ex2 at h = 1/32, ex3(N=6) at h = 1/8 adapted per block with M_cap = 4.
struct ReferenceRuns {
  GraphReport ex1, ex2, ex2_fine, ex3;
  double seconds = 0.0;
  std::string json() const;
};

ReferenceRuns reference_detections(int threads = 1);
std::vector<Check> detection_checks(const ReferenceRuns& runs);

}  // namespace cn2
