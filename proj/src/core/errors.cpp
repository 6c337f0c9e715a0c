#include "errors.hpp"

namespace cn2 {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::Lost: return "Lost";
    case ErrorCode::LeftDomain: return "LeftDomain";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotInNullity: return "NotInNullity";
    case ErrorCode::NotCN2Point: return "NotCN2Point";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::OrientationFlip: return "OrientationFlip";
    case ErrorCode::Blowup: return "Blowup";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace cn2
