/*
 * Copyright 2026 The Fuseval Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fuseval {

enum class ErrorCode {
  // trec_io
  kMalformedLine,
  kDuplicateDocument,
  kRunTagMismatch,
  kTopicListTooLong,
  kDuplicateJudgment,
  // fusion
  kNoRuns,
  kDuplicateRunTag,
  kUnknownAlgorithm,
  kInvalidParameter,
  kMissingWeight,
  kAllWeightsZero,
  kNoTrainingTopics,
  kInvalidSegmentCount,
  kNegativeWindow,
  kModelRunMismatch,
  // metrics
  kUnknownMetric,
  kUnknownTopic,
  kNoRelevant,
  kEmptyTopicSubset,
  // significance
  kTooFewPairs,
  kMisalignedTopics,
  // experiments
  kInvalidDocument,
  kOverlappingSplit,
  kUnknownTopicInSplit,
  kIncompleteSplit,
  kKTooLarge,
  kTrainingRequiredButNoTrainTopics,
  kDuplicateSpec,
  kDatasetMissing,
  kUnknownRun,
  // store / export
  kEmptyDataset,
  kNotFound,
  kStoreCorrupt,
  kStoreLocked,
  kIncompleteTable,
  kIo,
};

// Coarse grouping used to map errors onto CLI exit codes and HTTP statuses.
enum class ErrorCategory { kValidation, kNotFound, kConflict, kUnavailable, kIo };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)),
        code_(code),
        field_(std::move(field)) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }
  // Name of the offending input field, when the error is attributable to one.
  const std::string& field() const { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

}  // namespace fuseval
