#include "sparsedyn/error.hpp"

namespace sparsedyn {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kGrid: return "grid error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kDegenerateColumn: return "degenerate-column error";
    case ErrorKind::kInsufficientData: return "insufficient-data error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kUndefinedR2: return "undefined-R2 error";
    case ErrorKind::kSelection: return "selection error";
    case ErrorKind::kComparability: return "comparability error";
    case ErrorKind::kDivergence: return "divergence error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kConfig: return "config error";
  }
  return "error";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEvaluation:
    case ErrorKind::kUndefinedR2:
    case ErrorKind::kSelection:
    case ErrorKind::kDivergence:
      return ErrorCategory::kNumerical;
    default:
      return ErrorCategory::kValidation;
  }
}

}  // namespace sparsedyn
