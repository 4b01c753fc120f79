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

// Synthetic rating populations with known ground truth.

#ifndef IDSQS_SIMULATOR_H_
#define IDSQS_SIMULATOR_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "idsqs/domain.h"
#include "idsqs/reconstruction.h"

namespace idsqs {

enum class RaterKind { kDiligent, kRandomClicker };
std::string_view RaterKindName(RaterKind kind);

struct RaterProfile {
  RaterKind kind = RaterKind::kDiligent;
  double bias = 0.0;         // score units
  double residual_sd = 1.0;  // score units
  double attention = 1.0;    // probability of an on-model response
};

struct GroundTruth {
  std::map<Stimulus, double> true_quality;
  std::map<std::string, RaterProfile> profiles;
};

struct PopulationOptions {
  int diligent = 45;
  int clickers = 0;
  double bias_sd = 5.0;
  double residual_sd_lo = 2.0;
  double residual_sd_hi = 15.0;
};

// Truth: 0 at level 0, otherwise 9 * level * s with a per-(source, codec)
// slope s drawn from [0.6, 1.0], i.e. 2.5-JND-like steps scaled to the
// 0-100 axis. Subjects are named w001, w002, ... with the diligent raters
// first.
GroundTruth MakeGroundTruth(const StudyConfig& config,
                            const PopulationOptions& population,
                            uint64_t seed);

struct SimulationOptions {
  int batches_per_subject = 1;
  int64_t start_timestamp = 1'760'000'000'000;
};

// Subject k (in id order) rates batches (k * batches_per_subject + j) mod B.
// Diligent: clip(truth + bias + N(0, sd^2), 0, 100), replaced by a uniform
// draw with probability 1 - attention. Clicker: uniform on [0, 100]. Throws
// kCoverageGap if a question's stimulus has no true quality.
RatingTable Simulate(const StudyConfig& config, const GroundTruth& truth,
                     uint64_t seed, const SimulationOptions& options = {});

struct RecoveryMetrics {
  double rmse = 0.0;       // MOS vs true quality of each question's stimulus
  double plcc = 0.0;       // same pairs
  double bias_corr = 0.0;  // injected vs estimated, diligent subjects
  size_t questions = 0;
  size_t subjects = 0;
};

RecoveryMetrics EvaluateRecovery(
    const GroundTruth& truth, const ReconstructionResult& result,
    const std::map<std::string, Question>& questions);

void WriteGroundTruth(const GroundTruth& truth, std::ostream& out);
void SaveGroundTruth(const GroundTruth& truth,
                     const std::filesystem::path& path);
GroundTruth LoadGroundTruth(const std::filesystem::path& path);

}  // namespace idsqs

#endif  // IDSQS_SIMULATOR_H_
