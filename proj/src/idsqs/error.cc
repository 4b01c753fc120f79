// Copyright 2026 The IDSQS Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idsqs/error.h"

namespace idsqs {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNoTrapQuestions: return "NoTrapQuestions";
    case ErrorCode::kNoRatings: return "NoRatings";
    case ErrorCode::kMissingReferenceMos: return "MissingReferenceMos";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kCoverageGap: return "CoverageGap";
    case ErrorCode::kNotATrap: return "NotATrap";
    case ErrorCode::kInvalidManifest: return "InvalidManifest";
    case ErrorCode::kStageFailed: return "StageFailed";
    case ErrorCode::kSessionNotFound: return "SessionNotFound";
    case ErrorCode::kPhaseViolation: return "PhaseViolation";
    case ErrorCode::kOutOfOrder: return "OutOfOrder";
    case ErrorCode::kDuplicateResponse: return "DuplicateResponse";
    case ErrorCode::kDuplicateSubject: return "DuplicateSubject";
    case ErrorCode::kInsufficientDisplay: return "InsufficientDisplay";
    case ErrorCode::kRejected: return "Rejected";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Internal";
}

}  // namespace idsqs
