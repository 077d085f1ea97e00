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

#include "fuseval/error.h"

namespace fuseval {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateDocument: return "DuplicateDocument";
    case ErrorCode::kRunTagMismatch: return "RunTagMismatch";
    case ErrorCode::kTopicListTooLong: return "TopicListTooLong";
    case ErrorCode::kDuplicateJudgment: return "DuplicateJudgment";
    case ErrorCode::kNoRuns: return "NoRuns";
    case ErrorCode::kDuplicateRunTag: return "DuplicateRunTag";
    case ErrorCode::kUnknownAlgorithm: return "UnknownAlgorithm";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kMissingWeight: return "MissingWeight";
    case ErrorCode::kAllWeightsZero: return "AllWeightsZero";
    case ErrorCode::kNoTrainingTopics: return "NoTrainingTopics";
    case ErrorCode::kInvalidSegmentCount: return "InvalidSegmentCount";
    case ErrorCode::kNegativeWindow: return "NegativeWindow";
    case ErrorCode::kModelRunMismatch: return "ModelRunMismatch";
    case ErrorCode::kUnknownMetric: return "UnknownMetric";
    case ErrorCode::kUnknownTopic: return "UnknownTopic";
    case ErrorCode::kNoRelevant: return "NoRelevant";
    case ErrorCode::kEmptyTopicSubset: return "EmptyTopicSubset";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kMisalignedTopics: return "MisalignedTopics";
    case ErrorCode::kInvalidDocument: return "InvalidDocument";
    case ErrorCode::kOverlappingSplit: return "OverlappingSplit";
    case ErrorCode::kUnknownTopicInSplit: return "UnknownTopicInSplit";
    case ErrorCode::kIncompleteSplit: return "IncompleteSplit";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kTrainingRequiredButNoTrainTopics:
      return "TrainingRequiredButNoTrainTopics";
    case ErrorCode::kDuplicateSpec: return "DuplicateSpec";
    case ErrorCode::kDatasetMissing: return "DatasetMissing";
    case ErrorCode::kUnknownRun: return "UnknownRun";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kStoreCorrupt: return "StoreCorrupt";
    case ErrorCode::kStoreLocked: return "StoreLocked";
    case ErrorCode::kIncompleteTable: return "IncompleteTable";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kDatasetMissing:
      return ErrorCategory::kNotFound;
    case ErrorCode::kDuplicateSpec:
      return ErrorCategory::kConflict;
    case ErrorCode::kStoreLocked:
      return ErrorCategory::kUnavailable;
    case ErrorCode::kIo:
    case ErrorCode::kStoreCorrupt:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kValidation;
  }
}

}  // namespace fuseval
