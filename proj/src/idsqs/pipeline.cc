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

#include "idsqs/error.h"
#include "idsqs/reports.h"
#include "json.hpp"

namespace idsqs {

using nlohmann::json;

namespace {

constexpr Stage kStageOrder[] = {Stage::kCleanse,     Stage::kOutliers,
                                 Stage::kReconstruct, Stage::kBootstrap,
                                 Stage::kFitBeta,     Stage::kAlign};

bool Has(const std::vector<Stage>& stages, Stage s) {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

// Runs `body`, rewrapping any core error with the stage name.
template <typename Fn>
void RunStage(Stage stage, Fn&& body) {
  try {
    body();
  } catch (const Error& e) {
    Fail(ErrorCode::kStageFailed, std::string(StageName(stage)) + ": " +
                                      std::string(ErrorCodeName(e.code())) +
                                      ": " + e.what());
  }
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kCleanse: return "cleanse";
    case Stage::kOutliers: return "outliers";
    case Stage::kReconstruct: return "reconstruct";
    case Stage::kBootstrap: return "bootstrap";
    case Stage::kFitBeta: return "fit_beta";
    case Stage::kAlign: return "align";
  }
  return "cleanse";
}

std::optional<Stage> ParseStage(std::string_view name) {
  for (Stage s : kStageOrder) {
    if (StageName(s) == name) return s;
  }
  return std::nullopt;
}

PipelineManifest ParseManifest(std::string_view json_text,
                               const std::filesystem::path& base_dir) {
  PipelineManifest m;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };
  try {
    const json j = json::parse(json_text);
    const json& inputs = j.at("inputs");
    m.ratings = resolve(inputs.at("ratings").get<std::string>());
    if (inputs.contains("config")) {
      m.config = resolve(inputs["config"].get<std::string>());
    }
    if (inputs.contains("jnd")) m.jnd = resolve(inputs["jnd"].get<std::string>());
    if (inputs.contains("truth")) {
      m.truth = resolve(inputs["truth"].get<std::string>());
    }
    m.output_dir = resolve(j.value("output_dir", std::string("report")));
    m.seed = j.value("seed", uint64_t{0});

    std::vector<std::string> names;
    if (j.contains("stages")) {
      names = j["stages"].get<std::vector<std::string>>();
    } else {
      for (Stage s : kStageOrder) names.emplace_back(StageName(s));
      if (!m.jnd) names.pop_back();
    }
    int last = -1;
    for (const auto& name : names) {
      auto stage = ParseStage(name);
      if (!stage) Fail(ErrorCode::kInvalidManifest, "unknown stage " + name);
      const int rank = static_cast<int>(*stage);
      if (rank <= last) {
        Fail(ErrorCode::kInvalidManifest,
             "stage " + name + " is out of order or repeated; order is "
             "cleanse, outliers, reconstruct, bootstrap, fit_beta, align");
      }
      last = rank;
      m.stages.push_back(*stage);
    }
    if (Has(m.stages, Stage::kAlign)) {
      if (!Has(m.stages, Stage::kReconstruct)) {
        Fail(ErrorCode::kInvalidManifest, "align needs the reconstruct stage");
      }
      if (!m.jnd) Fail(ErrorCode::kInvalidManifest, "align needs inputs.jnd");
    }

    if (j.contains("parameters")) {
      const json& p = j["parameters"];
      PipelineParameters& q = m.parameters;
      q.otsu_bins = p.value("otsu_bins", q.otsu_bins);
      q.epsilon = p.value("epsilon", q.epsilon);
      q.max_iter = p.value("max_iter", q.max_iter);
      q.replicates = p.value("replicates", q.replicates);
      q.level = p.value("level", q.level);
      q.significance = p.value("significance", q.significance);
      q.threads = p.value("threads", q.threads);
      if (p.contains("grouping")) {
        auto g = ParseGrouping(p["grouping"].get<std::string>());
        if (!g) Fail(ErrorCode::kInvalidManifest, "unknown grouping");
        q.grouping = *g;
      }
      if (q.otsu_bins < 2 || q.epsilon <= 0.0 || q.max_iter < 1 ||
          q.replicates < 1 || !(q.level > 0.0 && q.level < 1.0) ||
          !(q.significance > 0.0 && q.significance < 1.0)) {
        Fail(ErrorCode::kInvalidManifest, "parameter out of range");
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorCode::kInvalidManifest, e.what());
  }
  return m;
}

PipelineManifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseManifest(buffer.str(), path.parent_path().empty()
                                         ? std::filesystem::path(".")
                                         : path.parent_path());
}

PipelineReport RunPipeline(const PipelineManifest& m) {
  PipelineReport report;
  std::optional<StudyConfig> config;
  if (m.config) config = LoadStudyConfig(*m.config);
  const RatingTable table =
      LoadRatings(m.ratings, config ? &*config : nullptr);
  const auto& dir = m.output_dir;
  std::filesystem::create_directories(dir);
  const PipelineParameters& p = m.parameters;

  report.input_instances = table.instances.size();
  IdSet kept = table.InstanceIds();
  std::ostringstream text;
  text << "input: " << table.ratings.size() << " ratings, "
       << table.instances.size() << " batch instances, "
       << table.SubjectIds().size() << " subjects\n";

  if (Has(m.stages, Stage::kCleanse)) {
    RunStage(Stage::kCleanse, [&] {
      report.cleansing = Cleanse(table, p.otsu_bins);
      WriteFile(dir / "cleansing.jsonl", [&](std::ostream& out) {
        WriteCleansingReport(*report.cleansing, out);
      });
      kept = report.cleansing->kept;
      text << Summarize(*report.cleansing) << '\n';
    });
    report.stages_run.push_back(Stage::kCleanse);
  }
  report.after_cleansing = kept.size();

  if (Has(m.stages, Stage::kOutliers)) {
    RunStage(Stage::kOutliers, [&] {
      report.outliers = RemoveOutliers(table, kept);
      WriteFile(dir / "outliers.jsonl", [&](std::ostream& out) {
        WriteOutlierReport(*report.outliers, out);
      });
      kept = report.outliers->kept;
      text << Summarize(*report.outliers) << '\n';
    });
    report.stages_run.push_back(Stage::kOutliers);
  }
  report.after_outliers = kept.size();
  text << "instances: " << report.input_instances << " -> "
       << report.after_cleansing << " -> " << report.after_outliers << '\n';

  const RatingTable screened = table.Restrict(kept);
  WriteFile(dir / "screened_ratings.jsonl",
            [&](std::ostream& out) { WriteRatings(screened, out); });

  ReconstructionOptions recon;
  recon.epsilon = p.epsilon;
  recon.max_iter = p.max_iter;

  if (Has(m.stages, Stage::kReconstruct)) {
    RunStage(Stage::kReconstruct, [&] {
      report.reconstruction = Reconstruct(screened, recon);
      report.dmos = ComputeDmos(*report.reconstruction, screened.questions);
      WriteFile(dir / "reconstruction.jsonl", [&](std::ostream& out) {
        WriteReconstruction(*report.reconstruction, out);
      });
      WriteFile(dir / "dmos.jsonl",
                [&](std::ostream& out) { WriteDmos(*report.dmos, out); });
      text << Summarize(*report.reconstruction) << '\n';
      if (m.truth) {
        const GroundTruth truth = LoadGroundTruth(*m.truth);
        report.recovery = EvaluateRecovery(truth, *report.reconstruction,
                                           screened.questions);
        text << Summarize(*report.recovery) << '\n';
      }
    });
    report.stages_run.push_back(Stage::kReconstruct);
  }

  if (Has(m.stages, Stage::kBootstrap)) {
    RunStage(Stage::kBootstrap, [&] {
      BootstrapOptions options;
      options.replicates = p.replicates;
      options.level = p.level;
      options.seed = m.seed;
      options.threads = p.threads;
      options.reconstruction = recon;
      report.bootstrap = BootstrapDmos(screened, options);
      WriteFile(dir / "bootstrap.jsonl", [&](std::ostream& out) {
        WriteBootstrap(*report.bootstrap, out);
      });
      text << Summarize(*report.bootstrap) << '\n';
    });
    report.stages_run.push_back(Stage::kBootstrap);
  }
  if (report.dmos) {
    WriteFile(dir / "dmos_series.csv", [&](std::ostream& out) {
      WriteDmosSeries(*report.dmos,
                      report.bootstrap ? &*report.bootstrap : nullptr, out);
    });
  }

  if (Has(m.stages, Stage::kFitBeta)) {
    RunStage(Stage::kFitBeta, [&] {
      report.fits = FitAllQuestions(screened, {}, p.significance);
      WriteFile(dir / "beta_fits.jsonl",
                [&](std::ostream& out) { WriteFits(*report.fits, out); });
      WriteFile(dir / "beta_scatter.csv",
                [&](std::ostream& out) { WriteFitScatter(*report.fits, out); });
      text << Summarize(*report.fits) << '\n';
    });
    report.stages_run.push_back(Stage::kFitBeta);
  }

  if (Has(m.stages, Stage::kAlign)) {
    RunStage(Stage::kAlign, [&] {
      const JndTable jnd = LoadJnd(*m.jnd);
      report.alignment = Align(*report.dmos, jnd, p.grouping);
      WriteFile(dir / "alignment.jsonl", [&](std::ostream& out) {
        WriteAlignment(*report.alignment, out);
      });
      WriteFile(dir / "alignment_scatter.csv", [&](std::ostream& out) {
        WriteAlignmentScatter(*report.alignment, out);
      });
      text << Summarize(*report.alignment) << '\n';
    });
    report.stages_run.push_back(Stage::kAlign);
  }

  report.summary = text.str();
  json summary{{"seed", m.seed},
               {"instances",
                {{"input", report.input_instances},
                 {"after_cleansing", report.after_cleansing},
                 {"after_outliers", report.after_outliers}}}};
  json stages = json::array();
  for (Stage s : report.stages_run) stages.push_back(std::string(StageName(s)));
  summary["stages"] = stages;
  if (report.cleansing) summary["otsu_threshold"] = report.cleansing->threshold;
  if (report.outliers) summary["outlier_cutoff"] = report.outliers->cutoff;
  if (report.reconstruction) {
    summary["reconstruction"] = {
        {"iterations", report.reconstruction->iterations},
        {"converged", report.reconstruction->converged}};
  }
  if (report.recovery) {
    summary["recovery"] = {{"rmse", report.recovery->rmse},
                           {"plcc", report.recovery->plcc},
                           {"bias_corr", report.recovery->bias_corr}};
  }
  if (report.fits) summary["gof_pass_rate"] = report.fits->PassRate();
  if (report.alignment) {
    json groups = json::object();
    for (const auto& [name, g] : report.alignment->groups) {
      groups[name] = {{"plcc", g.mapped_vs_jnd.plcc},
                      {"srocc", g.mapped_vs_jnd.srocc},
                      {"kendall_tau", g.mapped_vs_jnd.kendall_tau}};
    }
    summary["alignment"] = groups;
  }
  WriteFile(dir / "summary.json",
            [&](std::ostream& out) { out << summary.dump(2) << '\n'; });
  WriteFile(dir / "summary.txt",
            [&](std::ostream& out) { out << report.summary; });
  return report;
}

}  // namespace idsqs
