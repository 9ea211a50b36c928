#include "lexzip/error.hpp"

namespace lexzip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::EmptyBody: return "EmptyBody";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::EmptyDictionary: return "EmptyDictionary";
    case ErrorCode::SweepFailed: return "SweepFailed";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::EmptyPredictions: return "EmptyPredictions";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

HttpError::HttpError(long status, const std::string& url)
    : Error(ErrorCode::HttpError, "HTTP " + std::to_string(status) + " for " + url),
      status_(status) {}

}  // namespace lexzip
