#pragma once

#include <stdexcept>
#include <string>

namespace cn2 {

enum class ErrorCode {
  Syntax = 1,
  UnknownIdentifier,
  Domain,
  OutOfDomain,
  NotPositiveDefinite,
  BadParams,
  SupportViolation,
  Lost,
  LeftDomain,
  StepUnderflow,
  DimensionMismatch,
  NotInNullity,
  NotCN2Point,
  DegenerateFrame,
  OrientationFlip,
  Blowup,
  ResolutionTooCoarse,
  Io,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cn2
