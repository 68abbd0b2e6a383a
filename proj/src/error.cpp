#include "draftforge/error.hpp"

namespace draftforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::EmptyTranscript: return "EmptyTranscript";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NoEventFound: return "NoEventFound";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::MalformedBackendOutput: return "MalformedBackendOutput";
    case ErrorKind::TimeoutExceeded: return "TimeoutExceeded";
    case ErrorKind::MalformedPlaceholder: return "MalformedPlaceholder";
    case ErrorKind::InvalidTransition: return "InvalidTransition";
    case ErrorKind::PlaceholdersUnresolved: return "PlaceholdersUnresolved";
    case ErrorKind::SignatureMissing: return "SignatureMissing";
    case ErrorKind::UnknownPlaceholder: return "UnknownPlaceholder";
    case ErrorKind::EmptyResolution: return "EmptyResolution";
    case ErrorKind::InvalidName: return "InvalidName";
    case ErrorKind::TooFewPairs: return "TooFewPairs";
    case ErrorKind::UnbalancedDesign: return "UnbalancedDesign";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MissingCategory: return "MissingCategory";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::NoSidecar: return "NoSidecar";
    case ErrorKind::InvalidState: return "InvalidState";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

bool Error::is(ErrorKind kind) const noexcept {
  if (kind == kind_) return true;
  return kind == ErrorKind::InvalidTransition &&
         (kind_ == ErrorKind::PlaceholdersUnresolved || kind_ == ErrorKind::SignatureMissing);
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

void fail(ErrorKind kind, const std::string& message, std::size_t count) {
  throw Error(kind, message).with_count(count);
}

}  // namespace draftforge
