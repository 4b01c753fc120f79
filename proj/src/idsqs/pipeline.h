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

// Manifest-driven end-to-end analysis: cleansing, outlier removal,
// reconstruction, bootstrap, Beta fits and JND alignment, always in that
// order.

#ifndef IDSQS_PIPELINE_H_
#define IDSQS_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idsqs/alignment.h"
#include "idsqs/distfit.h"
#include "idsqs/reconstruction.h"
#include "idsqs/screening.h"
#include "idsqs/simulator.h"

namespace idsqs {

enum class Stage { kCleanse, kOutliers, kReconstruct, kBootstrap, kFitBeta,
                   kAlign };

std::string_view StageName(Stage stage);
std::optional<Stage> ParseStage(std::string_view name);

struct PipelineParameters {
  int otsu_bins = kDefaultOtsuBins;
  double epsilon = 1e-6;
  int max_iter = 1000;
  int replicates = 1000;
  double level = 0.95;
  double significance = 0.05;
  Grouping grouping = Grouping::kPooled;
  unsigned threads = 0;
};

struct PipelineManifest {
  std::filesystem::path ratings;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> jnd;
  std::optional<std::filesystem::path> truth;
  std::filesystem::path output_dir;
  std::vector<Stage> stages;
  uint64_t seed = 0;
  PipelineParameters parameters;
};

// Relative paths resolve against `base_dir`. Throws kInvalidManifest for
// unknown or out-of-order stages, stages whose inputs are missing, or bad
// parameters.
PipelineManifest ParseManifest(std::string_view json_text,
                               const std::filesystem::path& base_dir);
PipelineManifest LoadManifest(const std::filesystem::path& path);

struct PipelineReport {
  std::vector<Stage> stages_run;
  size_t input_instances = 0;
  size_t after_cleansing = 0;
  size_t after_outliers = 0;
  std::optional<CleansingReport> cleansing;
  std::optional<OutlierReport> outliers;
  std::optional<ReconstructionResult> reconstruction;
  std::optional<DmosTable> dmos;
  std::optional<BootstrapCI> bootstrap;
  std::optional<FitSummary> fits;
  std::optional<AlignmentReport> alignment;
  std::optional<RecoveryMetrics> recovery;
  std::string summary;
};

// Runs the stages and writes the report bundle under output_dir. A failing
// stage throws kStageFailed naming the stage and the underlying error.
PipelineReport RunPipeline(const PipelineManifest& manifest);

}  // namespace idsqs

#endif  // IDSQS_PIPELINE_H_
