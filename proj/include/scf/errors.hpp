#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scf {

enum class ErrorKind {
  NonConvergence,
  NonFinite,
  DimensionMismatch,
  NotCP,
  NotQubit,
  OutOfRange,
  InfeasiblePTM,
  NotUnitalForm,
  NotHermitian,
  NotGKSL,
  NotTP,
  NotUnital,
  NotPositive,
  ZeroGenerator,
  BudgetTooTight,
  ScheduleExhausted,
  ScanExhausted,
  InvalidDocument,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotCP: return "NotCP";
    case ErrorKind::NotQubit: return "NotQubit";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InfeasiblePTM: return "InfeasiblePTM";
    case ErrorKind::NotUnitalForm: return "NotUnitalForm";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotGKSL: return "NotGKSL";
    case ErrorKind::NotTP: return "NotTP";
    case ErrorKind::NotUnital: return "NotUnital";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::ZeroGenerator: return "ZeroGenerator";
    case ErrorKind::BudgetTooTight: return "BudgetTooTight";
    case ErrorKind::ScheduleExhausted: return "ScheduleExhausted";
    case ErrorKind::ScanExhausted: return "ScanExhausted";
    case ErrorKind::InvalidDocument: return "InvalidDocument";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and is what the
/// command-line tool prints; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace scf
