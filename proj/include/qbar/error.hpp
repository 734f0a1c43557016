#pragma once

#include <stdexcept>
#include <string>

namespace qbar {

enum class ErrorCode {
  // statevector
  ZeroNormInput,
  BadLength,
  QubitOutOfRange,
  ControlEqualsTarget,
  DimensionMismatch,
  InvalidState,
  // features
  TooShort,
  MissingModality,
  DuplicateModality,
  MissingProjection,
  // peqad
  DegenerateCenter,
  // scoring
  SingularCovariance,
  ClassTooSmall,
  DegenerateAxis,
  TooFewScores,
  GammaOutOfRange,
  OneClassValidation,
  // eval
  LengthMismatch,
  NoPositives,
  UnknownCreator,
  TooFewReports,
  // persistence
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  NonFiniteValue,
  SchemaViolation,
  MissingFile,
  TemporalLeak,
  VersionMismatch,
  CorruptPayload,
  // cli
  MissingCheckpoint,
  UncalibratedModel,
  BadConfig,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a stable error code alongside the human-readable message.
class QbarError : public std::runtime_error {
 public:
  QbarError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw QbarError(code, message);
}

}  // namespace qbar
