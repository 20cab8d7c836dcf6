#pragma once

#include <stdexcept>
#include <string>

namespace cgw {

enum class ErrorCode {
  MetricAxiomViolation,
  DisconnectedGraph,
  EmptySet,
  AmbientMismatch,
  BadK,
  InvalidInput,
  FamilyMismatch,
  ScaleOrderViolation,
  TargetClash,
  NotSeparated,
  ModulusMissing,
  ScaleCollapse,
  NotSubspace,
  TooLarge,
  NotFound,
  BudgetExceeded,
  MalformedElement,
  NoPeripherals,
  LeavesWindow,
  WindowTooSmall,
  ScaleMismatch,
  MissingFiber,
  TranslateFailure,
  Usage,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MetricAxiomViolation: return "MetricAxiomViolation";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::AmbientMismatch: return "AmbientMismatch";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::ScaleOrderViolation: return "ScaleOrderViolation";
    case ErrorCode::TargetClash: return "TargetClash";
    case ErrorCode::NotSeparated: return "NotSeparated";
    case ErrorCode::ModulusMissing: return "ModulusMissing";
    case ErrorCode::ScaleCollapse: return "ScaleCollapse";
    case ErrorCode::NotSubspace: return "NotSubspace";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::MalformedElement: return "MalformedElement";
    case ErrorCode::NoPeripherals: return "NoPeripherals";
    case ErrorCode::LeavesWindow: return "LeavesWindow";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::MissingFiber: return "MissingFiber";
    case ErrorCode::TranslateFailure: return "TranslateFailure";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

/// Library-wide exception; carries a machine-readable code plus a message
/// naming the offending pair/triple/piece where applicable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cgw
