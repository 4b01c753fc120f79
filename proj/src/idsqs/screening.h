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

// Batch-instance screening: trap-question accuracy with an Otsu split, then
// correlation-based outlier removal against the per-question mean.

#ifndef IDSQS_SCREENING_H_
#define IDSQS_SCREENING_H_

#include <map>
#include <string>

#include "idsqs/domain.h"
#include "idsqs/numerics.h"

namespace idsqs {

// TRAP_I: score/100. TRAP_II: 1 - score/100. Throws kNotATrap for STUDY.
double TrapAccuracy(double score, QuestionKind kind);

struct CleansingReport {
  double threshold = 0.0;
  int bins = kDefaultOtsuBins;
  std::map<std::string, double> accuracy;  // per batch instance
  IdSet kept;
  IdSet discarded;
};

// Instances whose mean trap accuracy is below the Otsu threshold are
// discarded. Throws kNoTrapQuestions for an instance without trap ratings
// and propagates kDegenerateInput from the threshold search.
CleansingReport Cleanse(const RatingTable& table, int bins = kDefaultOtsuBins);

inline constexpr double kOutlierCeiling = 0.85;

struct OutlierReport {
  std::map<std::string, double> cr;  // min(PLCC, SROCC) per instance
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation of cr
  double cutoff = 0.0;
  IdSet kept;
  IdSet removed;
  IdSet degenerate;  // constant scores; assigned cr = 0
  // The per-question mean includes the instance under test.
  bool leave_one_out = false;
};

// Scores each instance in `kept` on its STUDY questions against the plain
// per-question mean over `kept`, then removes instances whose score falls
// below min(mu - sigma, 0.85).
OutlierReport RemoveOutliers(const RatingTable& table, const IdSet& kept);

}  // namespace idsqs

#endif  // IDSQS_SCREENING_H_
