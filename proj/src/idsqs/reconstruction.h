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

// Bias/consistency-corrected MOS reconstruction, DMOS derivation and
// bootstrap confidence intervals.

#ifndef IDSQS_RECONSTRUCTION_H_
#define IDSQS_RECONSTRUCTION_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "idsqs/domain.h"

namespace idsqs {

struct ReconstructionOptions {
  double epsilon = 1e-6;  // on sum_q (MOS^n(q) - MOS^{n-1}(q))^2
  int max_iter = 1000;
  // sigma^2(R_i) is floored here before inversion (0.5 score-unit sd).
  double variance_floor = 0.25;
};

struct ReconstructionResult {
  std::map<std::string, double> mos;          // per question
  std::map<std::string, double> bias;         // per subject
  std::map<std::string, double> consistency;  // 1 / max(sd^2, floor)
  std::map<std::string, double> residual_sd;  // population sd of residuals
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;
};

// Flat observation list. Subjects and questions are dense indices so the
// bootstrap can resample without rebuilding tables.
struct Observations {
  std::vector<std::string> subjects;
  std::vector<std::string> questions;
  struct Entry {
    size_t subject;
    size_t question;
    double score;
  };
  std::vector<Entry> entries;

  static Observations FromTable(const RatingTable& table);
};

// Subjects are pooled over their batch instances. Only questions with at
// least one rating are estimated; an empty table throws kNoRatings. Hitting
// max_iter returns the last iterate with converged = false.
ReconstructionResult Reconstruct(const RatingTable& table,
                                 const ReconstructionOptions& options = {});
ReconstructionResult Reconstruct(const Observations& obs,
                                 const ReconstructionOptions& options = {});

struct DmosTable {
  std::map<Stimulus, double> mos;   // mean over the stimulus' questions
  std::map<Stimulus, double> dmos;  // mos - reference_mos[source]
  std::map<std::string, double> reference_mos;
};

// Throws kMissingReferenceMos when a source has no rated level-0 question.
DmosTable ComputeDmos(const ReconstructionResult& result,
                      const std::map<std::string, Question>& questions);

struct BootstrapOptions {
  int replicates = 1000;
  double level = 0.95;
  uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  ReconstructionOptions reconstruction;
};

struct ConfidenceInterval {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapCI {
  std::map<Stimulus, ConfidenceInterval> intervals;
  std::map<Stimulus, std::vector<double>> replicate_dmos;
  int replicates = 0;
  double level = 0.0;
  uint64_t seed = 0;
  int nonconverged = 0;
};

// Resamples each question's ratings with replacement (subject identity kept
// with each draw), re-runs Reconstruct + ComputeDmos, and takes the
// (1 -/+ level)/2 type-7 quantiles. Replicate r draws from a generator
// seeded by (seed, r) only, so results do not depend on thread scheduling.
BootstrapCI BootstrapDmos(const RatingTable& table,
                          const BootstrapOptions& options);

}  // namespace idsqs

#endif  // IDSQS_RECONSTRUCTION_H_
