#include "cbi/error.hpp"

namespace cbi {

std::string_view error_name(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::EmptyPartition: return "EmptyPartition";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::InvalidBandwidth: return "InvalidBandwidth";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InvalidSubsample: return "InvalidSubsample";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::FilterViolation: return "FilterViolation";
    case ErrorCode::InvalidModeCount: return "InvalidModeCount";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IOError: return "IOError";
  }
  return "Error";
}

} // namespace cbi
