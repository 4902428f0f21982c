#include "modalign/error.hpp"

namespace modalign {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidId: return "InvalidId";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::WrongModality: return "WrongModality";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::TooFewIds: return "TooFewIds";
    case ErrorCode::NoRecords: return "NoRecords";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::TooFewProteins: return "TooFewProteins";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::IdSetMismatch: return "IdSetMismatch";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::MissingDescription: return "MissingDescription";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateOutput: return "DegenerateOutput";
    case ErrorCode::RemoteFailure: return "RemoteFailure";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_user_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoFailure:
    case ErrorCode::DegenerateOutput:
    case ErrorCode::RemoteFailure:
    case ErrorCode::Internal:
      return false;
    default:
      return true;
  }
}

}  // namespace modalign
