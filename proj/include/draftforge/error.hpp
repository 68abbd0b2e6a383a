#pragma once

// draftforge/error.hpp — Error kinds shared by every module.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace draftforge {

enum class ErrorKind {
  // transcript
  MalformedLine,
  EmptyTranscript,
  DuplicateIndex,
  EmptyReference,
  LengthMismatch,
  InvalidValue,
  // noise
  IndexOutOfRange,
  // corpus
  NoEventFound,
  PreconditionViolated,
  IoFailure,
  // backends
  BackendUnavailable,
  MalformedBackendOutput,
  TimeoutExceeded,
  // draft
  MalformedPlaceholder,
  // workflow
  InvalidTransition,
  PlaceholdersUnresolved,
  SignatureMissing,
  UnknownPlaceholder,
  EmptyResolution,
  InvalidName,
  // eval
  TooFewPairs,
  UnbalancedDesign,
  EmptyInput,
  MissingCategory,
  // service
  NotFound,
  NoSidecar,
  InvalidState,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }

  // PlaceholdersUnresolved and SignatureMissing are refinements of
  // InvalidTransition: is(InvalidTransition) holds for all three.
  bool is(ErrorKind kind) const noexcept;

  // Count payload for MalformedLine (line number) and PlaceholdersUnresolved.
  std::size_t count() const noexcept { return count_; }
  Error& with_count(std::size_t count) {
    count_ = count;
    return *this;
  }

 private:
  ErrorKind kind_;
  std::size_t count_ = 0;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);
[[noreturn]] void fail(ErrorKind kind, const std::string& message, std::size_t count);

}  // namespace draftforge
