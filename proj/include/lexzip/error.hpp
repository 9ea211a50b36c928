#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexzip {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  NetworkError,
  HttpError,
  EmptyBody,
  EmptySplit,
  EmptyCorpus,
  InvalidDistribution,
  EmptyVocabulary,
  EmptyTable,
  EmptyDictionary,
  SweepFailed,
  EmptyInput,
  ModelMismatch,
  DegenerateData,
  InsufficientData,
  ArityMismatch,
  EmptyPredictions,
  PoolTooSmall,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure the library reports is one of these;
/// `code()` distinguishes the error contract of the failing operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-2xx response after following redirects.
class HttpError : public Error {
 public:
  HttpError(long status, const std::string& url);

  long status() const noexcept { return status_; }

 private:
  long status_;
};

}  // namespace lexzip
