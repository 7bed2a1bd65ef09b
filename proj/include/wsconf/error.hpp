#pragma once

#include <stdexcept>
#include <string>

namespace wsconf {

/// Error categories surfaced by the library. The numeric values are shared
/// with the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kParse = 2,
  kIo = 3,
  kInfeasible = 4,
  kLimitExceeded = 5,
  kInconsistentData = 6,
  kUnsupported = 7,
  kInternal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::kInvalidArgument, what);
}

/// Absolute tolerance for comparisons whose equality semantics matter
/// (probability sums, threshold membership, score ties).
inline constexpr double kTolerance = 1e-9;

}  // namespace wsconf
