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

#ifndef IDSQS_ERROR_H_
#define IDSQS_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace idsqs {

// Every failure raised by the core carries one of these codes. The numeric
// values are part of the C API (see include/idsqs/idsqs.h) and must not be
// renumbered.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kMalformedRecord = 3,
  kDanglingReference = 4,
  kScoreOutOfRange = 5,
  kDegenerateInput = 6,
  kRankDeficient = 7,
  kDomainError = 8,
  kNoTrapQuestions = 9,
  kNoRatings = 10,
  kMissingReferenceMos = 11,
  kDegenerateSample = 12,
  kTooFewSamples = 13,
  kInsufficientOverlap = 14,
  kCoverageGap = 15,
  kNotATrap = 16,
  kInvalidManifest = 17,
  kStageFailed = 18,
  kSessionNotFound = 19,
  kPhaseViolation = 20,
  kOutOfOrder = 21,
  kDuplicateResponse = 22,
  kDuplicateSubject = 23,
  kInsufficientDisplay = 24,
  kRejected = 25,
  kInvalidConfig = 26,
  kInternal = 99,
};

// Stable CamelCase name ("ScoreOutOfRange"), used in HTTP error bodies and
// CLI diagnostics.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace idsqs

#endif  // IDSQS_ERROR_H_
