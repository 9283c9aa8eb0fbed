#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbi {

// Every error class carries a stable numeric value; the CLI uses it verbatim
// as the process exit code.
enum class ErrorCode : int
{
  EmptyPartition = 10,
  DimensionMismatch = 11,
  MetricMismatch = 12,
  IndexError = 13,
  InvalidBandwidth = 14,
  EmptyTrainingSet = 15,
  InvalidSubsample = 16,
  NoCandidate = 17,
  FilterViolation = 18,
  InvalidModeCount = 19,
  OutOfRange = 20,
  BudgetInfeasible = 21,
  FormatError = 22,
  ValidationError = 23,
  InvalidSplit = 24,
  InvalidArgument = 25,
  IOError = 26,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

private:
  ErrorCode code_;
};

// Parse failures that point at a specific input line (1-based).
class FormatError : public Error
{
public:
  FormatError(std::size_t line, const std::string& message)
    : Error(ErrorCode::FormatError, "line " + std::to_string(line) + ": " + message)
    , line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace cbi
