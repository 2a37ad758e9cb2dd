#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace warpfill {

enum class ErrorCode {
  SlopeOrder,
  IntersectionOutside,
  Mismatch,
  OutOfDomain,
  Domain,
  Degenerate,
  OutOfRange,
  SingularPoint,
  NonpositiveWarp,
  WindowTooSmall,
  SolverFailure,
  NoConvergence,
  RankDeficient,
  NonPrimitive,
  Empty,
  TopMismatch,
  ScheduleEmpty,
  InvalidInput,
};

std::string_view error_code_name(ErrorCode code);

/// Exception carrying one of the library's named error conditions.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SlopeOrder: return "SLOPE_ORDER";
    case ErrorCode::IntersectionOutside: return "INTERSECTION_OUTSIDE";
    case ErrorCode::Mismatch: return "MISMATCH";
    case ErrorCode::OutOfDomain: return "OUT_OF_DOMAIN";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::Degenerate: return "DEGENERATE";
    case ErrorCode::OutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::SingularPoint: return "SINGULAR_POINT";
    case ErrorCode::NonpositiveWarp: return "NONPOSITIVE_WARP";
    case ErrorCode::WindowTooSmall: return "WINDOW_TOO_SMALL";
    case ErrorCode::SolverFailure: return "SOLVER_FAILURE";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::RankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::NonPrimitive: return "NON_PRIMITIVE";
    case ErrorCode::Empty: return "EMPTY";
    case ErrorCode::TopMismatch: return "TOP_MISMATCH";
    case ErrorCode::ScheduleEmpty: return "SCHEDULE_EMPTY";
    case ErrorCode::InvalidInput: return "INVALID_INPUT";
  }
  return "UNKNOWN";
}

}  // namespace warpfill
