#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modalign {

enum class ErrorCode {
  // input / validation
  FileNotFound,
  BadMagic,
  VersionUnsupported,
  DimMismatch,
  DuplicateId,
  InvalidId,
  NonFiniteValue,
  TruncatedFile,
  WrongModality,
  EmptyIntersection,
  TooFewIds,
  NoRecords,
  MalformedHeader,
  EmptyInput,
  ShapeMismatch,
  ConfigMismatch,
  InvalidConfig,
  EmptyBatch,
  TooFewProteins,
  LengthMismatch,
  ZeroVariance,
  IdSetMismatch,
  EmptyIndex,
  MissingDescription,
  UnknownId,
  UnknownPreset,
  BadDims,
  // runtime
  IoFailure,
  DegenerateOutput,
  RemoteFailure,
  Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad user input (exit code 1); false for
/// failures during execution (exit code 2).
bool is_user_error(ErrorCode code) noexcept;

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

}  // namespace modalign
