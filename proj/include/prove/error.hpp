#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prove {

enum class ErrorCode {
  kInvalidArgument,
  kUnverbalisableObject,
  kMissingLabel,
  kOverrideNotAnAlias,
  kBackendProtocol,
  kTimeout,
  kUnavailable,
  kNotHtml,
  kOffline,
  kSchemaMismatch,
  kNotTrained,
  kSingleClassDataset,
  kSchemaError,
  kLengthMismatch,
  kSingleClassLabels,
  kZeroVariance,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Every failure the library reports carries one of the codes above so that
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace prove
