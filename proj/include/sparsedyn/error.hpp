#pragma once

#include <stdexcept>
#include <string>

namespace sparsedyn {

// Failure classes. Validation kinds are problems with the caller's inputs;
// numerical kinds come from the algorithms themselves.
enum class ErrorKind {
  kSchema,
  kGrid,
  kData,
  kDegenerateColumn,
  kInsufficientData,
  kParameter,
  kEvaluation,
  kUndefinedR2,
  kSelection,
  kComparability,
  kDivergence,
  kRange,
  kIo,
  kConfig,
};

enum class ErrorCategory { kValidation, kNumerical };

const char* to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

// Integration blow-up; carries the time at which the bound was crossed.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& message)
      : Error(ErrorKind::kDivergence, message), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace sparsedyn
