#include "slt/error.hpp"

namespace slt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::NonIncreasingEventTime: return "NonIncreasingEventTime";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DocMismatch: return "DocMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingTime: return "MissingTime";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::ZeroSource: return "ZeroSource";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::EmptyRecords: return "EmptyRecords";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NoDocuments: return "NoDocuments";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace slt
