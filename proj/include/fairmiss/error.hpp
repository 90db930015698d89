// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMISS_ERROR_HPP
#define FAIRMISS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairmiss {

/// Machine-readable category of a failure. Every exception thrown by the
/// library carries one of these so callers (and the CLI) can map failures to
/// stable exit codes without parsing messages.
enum class ErrorCode {
  kIo,
  kSchemaMismatch,
  kParseError,
  kRaggedRows,
  kMissingLabel,
  kInvalidArgument,
  kInvalidGroup,
  kUnknownColumn,
  kLabelDropForbidden,
  kDegenerateSplit,
  kSampleTooLarge,
  kEmptyGroup,
  kUndefinedRatio,
  kUndefinedRate,
  kLengthMismatch,
  kSingularCovariance,
  kAllMissingColumn,
  kNoMissingValues,
  kInsufficientPatternSize,
  kTooLargeToEnumerate,
  kMissingValuesUnsupported,
  kEmptyTrainingSet,
  kNotATree,
  kRegimeEmpty,
  kNoColumnsLeft,
  kInsufficientRepetitions,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kRaggedRows: return "RaggedRows";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidGroup: return "InvalidGroup";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kLabelDropForbidden: return "LabelDropForbidden";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kSampleTooLarge: return "SampleTooLarge";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kUndefinedRatio: return "UndefinedRatio";
    case ErrorCode::kUndefinedRate: return "UndefinedRate";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kAllMissingColumn: return "AllMissingColumn";
    case ErrorCode::kNoMissingValues: return "NoMissingValues";
    case ErrorCode::kInsufficientPatternSize: return "InsufficientPatternSize";
    case ErrorCode::kTooLargeToEnumerate: return "TooLargeToEnumerate";
    case ErrorCode::kMissingValuesUnsupported: return "MissingValuesUnsupported";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kNotATree: return "NotATree";
    case ErrorCode::kRegimeEmpty: return "RegimeEmpty";
    case ErrorCode::kNoColumnsLeft: return "NoColumnsLeft";
    case ErrorCode::kInsufficientRepetitions: return "InsufficientRepetitions";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairmiss

#endif  // FAIRMISS_ERROR_HPP
