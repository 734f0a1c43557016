#include "qbar/error.hpp"

namespace qbar {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroNormInput: return "ZeroNormInput";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::QubitOutOfRange: return "QubitOutOfRange";
    case ErrorCode::ControlEqualsTarget: return "ControlEqualsTarget";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::MissingModality: return "MissingModality";
    case ErrorCode::DuplicateModality: return "DuplicateModality";
    case ErrorCode::MissingProjection: return "MissingProjection";
    case ErrorCode::DegenerateCenter: return "DegenerateCenter";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::DegenerateAxis: return "DegenerateAxis";
    case ErrorCode::TooFewScores: return "TooFewScores";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::OneClassValidation: return "OneClassValidation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::UnknownCreator: return "UnknownCreator";
    case ErrorCode::TooFewReports: return "TooFewReports";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::TemporalLeak: return "TemporalLeak";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptPayload: return "CorruptPayload";
    case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::UncalibratedModel: return "UncalibratedModel";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

}  // namespace qbar
