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

#include "idsqs/pipeline.h"

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "idsqs/reports.h"
#include "json.hpp"
#include "test_util.h"

namespace idsqs {
namespace {

using nlohmann::json;
using testing::CodeOf;
namespace fs = std::filesystem;

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void Spit(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// Simulated study with clickers, ground truth and a JND table in `dir`.
void WriteInputs(const fs::path& dir) {
  const StudyConfig config = GenerateDefaultConfig(61);
  PopulationOptions pop;
  pop.diligent = 20;
  pop.clickers = 4;
  const GroundTruth truth = MakeGroundTruth(config, pop, 62);
  SimulationOptions sim;
  sim.batches_per_subject = 2;
  SaveStudyConfig(config, dir / "config.json");
  SaveRatings(Simulate(config, truth, 63, sim), dir / "ratings.jsonl");
  SaveGroundTruth(truth, dir / "truth.jsonl");
  JndTable jnd;
  for (const auto& [s, q] : truth.true_quality) jnd.jnd[s] = q / 25 + 0.001 * q * q / 100;
  WriteFile(dir / "jnd.jsonl", [&](std::ostream& out) { WriteJnd(jnd, out); });
}

PipelineManifest Parse(const json& j) { return ParseManifest(j.dump(), "/base"); }

TEST_CASE("manifest defaults and path resolution") {
  const PipelineManifest m = Parse({{"inputs", {{"ratings", "r.jsonl"}}}});
  CHECK(m.ratings == fs::path("/base/r.jsonl"));
  CHECK(m.output_dir == fs::path("/base/report"));
  CHECK(m.stages.size() == 5);
  CHECK(m.stages.back() == Stage::kFitBeta);
  CHECK(m.parameters.replicates == 1000);
  const PipelineManifest full =
      Parse({{"inputs", {{"ratings", "/abs/r.jsonl"}, {"jnd", "j.jsonl"}}},
             {"output_dir", "out"},
             {"seed", 9},
             {"parameters", {{"grouping", "per-source"}, {"replicates", 50}}}});
  CHECK(full.ratings == fs::path("/abs/r.jsonl"));
  CHECK(full.stages.size() == 6);
  CHECK(full.seed == 9);
  CHECK(full.parameters.grouping == Grouping::kPerSource);
  CHECK(full.parameters.replicates == 50);
}

TEST_CASE("manifest stage order is enforced") {
  const json inputs = {{"ratings", "r.jsonl"}, {"jnd", "j.jsonl"}};
  auto code = [&](const json& stages) {
    return CodeOf([&] { Parse({{"inputs", inputs}, {"stages", stages}}); });
  };
  CHECK(code({"reconstruct", "cleanse"}) == ErrorCode::kInvalidManifest);
  CHECK(code({"cleanse", "cleanse"}) == ErrorCode::kInvalidManifest);
  CHECK(code({"cleanse", "smooth"}) == ErrorCode::kInvalidManifest);
  CHECK(code({"cleanse", "align"}) == ErrorCode::kInvalidManifest);
  CHECK(code({"outliers", "fit_beta"}) == ErrorCode::kInternal);  // accepted
  CHECK(CodeOf([] {
          Parse({{"inputs", {{"ratings", "r"}}}, {"stages", {"reconstruct", "align"}}});
        }) == ErrorCode::kInvalidManifest);
}

TEST_CASE("manifest parameters and syntax are validated") {
  const json inputs = {{"ratings", "r.jsonl"}};
  for (const json& p : {json{{"otsu_bins", 1}}, json{{"epsilon", 0}}, json{{"max_iter", 0}},
                        json{{"replicates", 0}}, json{{"level", 1.0}},
                        json{{"significance", 0}}, json{{"grouping", "global"}},
                        json{{"replicates", "many"}}}) {
    CHECK(CodeOf([&] { Parse({{"inputs", inputs}, {"parameters", p}}); }) ==
          ErrorCode::kInvalidManifest);
  }
  CHECK(CodeOf([] { ParseManifest("{", "."); }) == ErrorCode::kInvalidManifest);
  CHECK(CodeOf([] { ParseManifest("{}", "."); }) == ErrorCode::kInvalidManifest);
  CHECK(CodeOf([] { LoadManifest("/nonexistent/manifest.json"); }) == ErrorCode::kIo);
}

TEST_CASE("full pipeline writes a reproducible bundle") {
  const fs::path dir = testing::TempDir("pipeline_full");
  WriteInputs(dir);
  const json manifest = {
      {"inputs",
       {{"ratings", "ratings.jsonl"}, {"config", "config.json"},
        {"truth", "truth.jsonl"}, {"jnd", "jnd.jsonl"}}},
      {"output_dir", "a"},
      {"seed", 5},
      {"parameters", {{"replicates", 40}}}};
  Spit(dir / "a.json", manifest.dump());
  json second = manifest;
  second["output_dir"] = "b";
  second["parameters"]["threads"] = 3;
  Spit(dir / "b.json", second.dump());

  const PipelineReport r = RunPipeline(LoadManifest(dir / "a.json"));
  RunPipeline(LoadManifest(dir / "b.json"));
  CHECK(r.stages_run.size() == 6);
  CHECK(r.input_instances == 48);
  CHECK(r.after_cleansing < r.input_instances);
  CHECK(r.after_outliers <= r.after_cleansing);
  REQUIRE(r.recovery.has_value());
  CHECK(r.recovery->plcc > 0.95);
  REQUIRE(r.alignment.has_value());
  CHECK(r.alignment->groups.at("All").mapped_vs_jnd.plcc > 0.9);

  const char* files[] = {"cleansing.jsonl", "outliers.jsonl", "screened_ratings.jsonl",
                         "reconstruction.jsonl", "dmos.jsonl", "bootstrap.jsonl",
                         "dmos_series.csv", "beta_fits.jsonl", "beta_scatter.csv",
                         "alignment.jsonl", "alignment_scatter.csv", "summary.json",
                         "summary.txt"};
  for (const char* f : files) {
    INFO(f);
    REQUIRE(fs::exists(dir / "a" / f));
    CHECK(Slurp(dir / "a" / f) == Slurp(dir / "b" / f));
  }
  const json summary = json::parse(Slurp(dir / "a" / "summary.json"));
  CHECK(summary["stages"].size() == 6);
  CHECK(summary["instances"]["input"] == 48);
  CHECK(summary["seed"] == 5);
  CHECK(Slurp(dir / "a" / "summary.txt") == r.summary);
}

TEST_CASE("partial stage lists skip screening") {
  const fs::path dir = testing::TempDir("pipeline_partial");
  WriteInputs(dir);
  PipelineManifest m = ParseManifest(
      json{{"inputs", {{"ratings", "ratings.jsonl"}}}, {"stages", {"reconstruct"}}}.dump(), dir);
  const PipelineReport r = RunPipeline(m);
  CHECK(r.after_outliers == r.input_instances);
  CHECK_FALSE(r.cleansing.has_value());
  CHECK_FALSE(fs::exists(dir / "report" / "cleansing.jsonl"));
  CHECK(fs::exists(dir / "report" / "dmos.jsonl"));
  CHECK(fs::exists(dir / "report" / "dmos_series.csv"));
}

TEST_CASE("stage failures name the stage") {
  const fs::path dir = testing::TempDir("pipeline_fail");
  // No trap questions at all.
  SaveRatings(testing::DenseTable({{10, 20, 30, 0}, {12, 25, 28, 2}}, testing::StudyQuestions(3)),
              dir / "ratings.jsonl");
  PipelineManifest m =
      ParseManifest(json{{"inputs", {{"ratings", "ratings.jsonl"}}}}.dump(), dir);
  try {
    RunPipeline(m);
    FAIL("expected a stage failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStageFailed);
    CHECK(std::string(e.what()).rfind("cleanse: NoTrapQuestions: ", 0) == 0);
  }
  // Without cleansing the same data gets through reconstruction.
  m.stages = {Stage::kReconstruct};
  CHECK(RunPipeline(m).reconstruction->converged);
}

}  // namespace
}  // namespace idsqs
