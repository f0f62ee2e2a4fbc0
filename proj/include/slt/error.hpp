#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slt {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MalformedLine,
  NonMonotonicTime,
  NegativeTime,
  NonIncreasingEventTime,
  EmptyLog,
  EmptyCorpus,
  DocMismatch,
  IndexOutOfRange,
  MissingTime,
  EmptySamples,
  ZeroSource,
  DegenerateVariance,
  LengthMismatch,
  EmptyReference,
  EmptyRecords,
  ConfigInvalid,
  NoDocuments,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the Python bindings) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace slt
