#pragma once

// Plain-text metric spec files.
//
//   [chart]
//   dimension = 3
//   coords = x y z
//   box = -1 1, -1 1, 0 6.283185307179586
//   periodic = z
//   label = example          (optional)
//   margin = 0.25            (optional)
//
//   [metric]                 (or [metric NAME] for a block)
//   g 1 1 = 1 + x^2
//   g 1 2 = 0.1*sin(z)       (omitted off-diagonal entries are 0, diagonal 1)
//
//   [blocks]                 (optional; replaces the chart box)
//   A box = -1 1, -1 1, -1 1 periodic = y z
//
//   [glue]
//   A:1:+ -> B:1:- perm=1,3,2 flip=+,+,- shift=-2,0,0
//
// Axes and permutation entries are 1-based. '#' starts a comment.

#include <string>

#include "metric.hpp"

namespace cn2 {

class SpecError : public Error {
 public:
  SpecError(ErrorCode code, int line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

Atlas parse_spec(const std::string& text);
Atlas load_spec(const std::string& path);

}  // namespace cn2
