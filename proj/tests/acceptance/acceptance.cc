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

// Acceptance checks for the analysis engine and study service. Prints one
// "PASS <n> ...", "FAIL <n> ..." or "SKIP <n> ..." line per criterion and
// exits nonzero when any criterion fails.

#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "idsqs/alignment.h"
#include "idsqs/distfit.h"
#include "idsqs/pipeline.h"
#include "idsqs/random.h"
#include "idsqs/reconstruction.h"
#include "idsqs/reports.h"
#include "idsqs/screening.h"
#include "idsqs/service.h"
#include "idsqs/simulator.h"
#include "oracles.h"
#include "test_util.h"

namespace idsqs {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kPass;
  std::string detail;
};

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// Collects named sub-checks; the criterion passes when all of them do.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failed_.push_back(what);
  }
  void Note(const std::string& text) { notes_.push_back(text); }

  Outcome Result() const {
    Outcome o;
    o.verdict = failed_.empty() ? Verdict::kPass : Verdict::kFail;
    std::string text;
    for (const auto& n : notes_) text += (text.empty() ? "" : "; ") + n;
    for (const auto& f : failed_) text += (text.empty() ? "" : "; ") + ("violated: " + f);
    o.detail = text;
    return o;
  }

 private:
  std::vector<std::string> notes_;
  std::vector<std::string> failed_;
};

// ---------------------------------------------------------------------------
// 1. Recovery of known qualities and biases.

Outcome OracleRecovery() {
  Checks c;
  StudyConfig config;
  config.study_id = "oracle";
  BatchDef batch{"b1", {}};
  const std::vector<std::string> sources = {"src02", "src06", "src07", "src09", "src10"};
  for (const auto& source : sources) {
    for (int level = 1; level <= 10; ++level) {
      const std::string id = Format("q%03zu", config.questions.size() + 1);
      config.questions[id] = MakeQuestion(id, QuestionKind::kStudy, {source, Codec::kJpeg, level});
      batch.question_ids.push_back(id);
    }
  }
  config.batches = {batch};

  PopulationOptions pop;
  pop.diligent = 45;
  pop.bias_sd = 5;
  pop.residual_sd_lo = 2;
  pop.residual_sd_hi = 15;
  auto run = [&](uint64_t seed) {
    const GroundTruth truth = MakeGroundTruth(config, pop, seed);
    const RatingTable table = Simulate(config, truth, seed + 1);
    const ReconstructionResult r = Reconstruct(table);
    c.Expect(r.converged, Format("seed %llu converged", static_cast<unsigned long long>(seed)));
    return EvaluateRecovery(truth, r, table.questions);
  };

  Stopwatch timer;
  const RecoveryMetrics m = run(2026);
  const double seconds = timer.Seconds();
  c.Note(Format("seed 2026, 45 raters x %zu stimuli: RMSE %.3f, bias corr %.4f, %.3f s",
                m.questions, m.rmse, m.bias_corr, seconds));
  c.Expect(m.questions == 50, "50 stimuli rated");
  c.Expect(m.rmse < 2.0, "RMSE < 2.0");
  c.Expect(m.bias_corr > 0.95, "bias correlation > 0.95");
  c.Expect(seconds < 10.0, "runtime < 10 s");

  // Spread over independent populations, reported for context.
  constexpr int kSeeds = 100;
  double worst_rmse = 0, mean_corr = 0, min_corr = 1;
  int below = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const RecoveryMetrics s = run(seed);
    worst_rmse = std::max(worst_rmse, s.rmse);
    mean_corr += s.bias_corr / kSeeds;
    min_corr = std::min(min_corr, s.bias_corr);
    below += s.bias_corr <= 0.95;
  }
  c.Note(Format("over %d other seeds: max RMSE %.3f, bias corr mean %.4f min %.4f, %d below 0.95",
                kSeeds, worst_rmse, mean_corr, min_corr, below));
  return c.Result();
}

// ---------------------------------------------------------------------------
// 2. Trap-based cleansing separates clickers from diligent raters.

Outcome ScreeningRecall() {
  Checks c;
  std::map<std::string, Question> questions;
  BatchDef batch{"b1", {}};
  auto add = [&](Question q) {
    batch.question_ids.push_back(q.question_id);
    questions[q.question_id] = std::move(q);
  };
  const Codec codecs[] = {Codec::kJpeg, Codec::kJpeg2000, Codec::kAvif, Codec::kVvcIntra,
                          Codec::kJpegXl};
  for (int k = 0; k < 10; ++k) {
    add(MakeQuestion(Format("s%02d", k), QuestionKind::kStudy, {"src02", codecs[k % 5], 1 + k}));
  }
  for (int k = 0; k < 5; ++k) {
    add(MakeQuestion(Format("t1_%d", k), QuestionKind::kTrapI, {"src06", codecs[k], 10}));
    add(MakeQuestion(Format("t2_%d", k), QuestionKind::kTrapII, Stimulus::Pristine("src06")));
  }
  Engine rng = DerivedEngine(2026, 2);
  std::vector<Rating> ratings;
  std::set<std::string> clickers, diligent;
  for (int i = 0; i < 100; ++i) {
    const bool clicker = i % 2 == 1;
    const std::string subject = Format("%s%03d", clicker ? "c" : "d", i);
    (clicker ? clickers : diligent).insert(subject + "-b1");
    for (const auto& qid : batch.question_ids) {
      const QuestionKind kind = questions.at(qid).kind;
      double score;
      if (clicker) {
        score = Uniform(rng, 0, 100);
      } else if (kind == QuestionKind::kStudy) {
        score = std::clamp(Normal(rng, 40, 10), 0.0, 100.0);
      } else {
        const double accuracy = std::clamp(Normal(rng, 0.9, 0.08), 0.0, 1.0);
        score = 100 * (kind == QuestionKind::kTrapI ? accuracy : 1 - accuracy);
      }
      ratings.push_back({subject, subject + "-b1", "b1", qid, score, 0, 0, 0});
    }
  }
  const RatingTable table = RatingTable::Build(questions, {{"b1", batch}}, ratings);
  double mean_d = 0, mean_c = 0;
  Stopwatch timer;
  const CleansingReport r = Cleanse(table);
  const double seconds = timer.Seconds();
  int clickers_dropped = 0, diligent_dropped = 0;
  for (const auto& id : r.discarded) {
    clickers_dropped += clickers.contains(id);
    diligent_dropped += diligent.contains(id);
  }
  for (const auto& id : clickers) mean_c += r.accuracy.at(id) / clickers.size();
  for (const auto& id : diligent) mean_d += r.accuracy.at(id) / diligent.size();
  c.Note(Format("mean accuracy diligent %.3f clickers %.3f; threshold %.2f; "
                "clickers discarded %d/50, diligent discarded %d/50; %.4f s",
                mean_d, mean_c, r.threshold, clickers_dropped, diligent_dropped, seconds));
  c.Expect(clickers_dropped >= 48, ">= 95% of clickers discarded");
  c.Expect(diligent_dropped <= 2, "<= 5% of diligent discarded");
  c.Expect(r.threshold > 0.6 && r.threshold < 0.8, "threshold in (0.6, 0.8)");
  c.Expect(seconds < 1.0, "runtime < 1 s");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 3. Fixed-point properties of the reconstruction.

struct Fixture {
  Observations obs;
  std::map<std::string, Question> questions;
};

// Biased noisy raters over one source with a pristine reference question;
// a fraction `missing` of ratings is dropped (every rater and question keeps
// at least one rating through a diagonal band).
Fixture RandomFixture(Engine& rng, size_t subjects, size_t n_questions, double missing) {
  Fixture f;
  const auto qs = testing::StudyQuestions(static_cast<int>(n_questions) - 1);
  for (const auto& q : qs) {
    f.questions[q.question_id] = q;
    f.obs.questions.push_back(q.question_id);
  }
  for (size_t i = 0; i < subjects; ++i) f.obs.subjects.push_back(Format("r%03zu", i));
  std::vector<double> truth(n_questions);
  for (auto& t : truth) t = Uniform(rng, 5, 90);
  truth.back() = 0;
  for (size_t i = 0; i < subjects; ++i) {
    const double bias = Normal(rng, 0, 5);
    const double sd = Uniform(rng, 2, 15);
    for (size_t q = 0; q < n_questions; ++q) {
      const bool band = (i + q) % subjects == 0 || (i + q) % n_questions == 0 || q == n_questions - 1;
      if (!band && Uniform01(rng) < missing) continue;
      f.obs.entries.push_back({i, q, std::clamp(truth[q] + bias + Normal(rng, 0, sd), 0.0, 100.0)});
    }
  }
  return f;
}

Outcome FixedPointProperties() {
  Checks c;
  Engine rng = DerivedEngine(2026, 3);
  ReconstructionOptions tight;
  tight.epsilon = 1e-24;
  double worst_mos = 0, worst_dmos = 0, worst_bias = 0, worst_mean = 0;
  int max_iterations = 0, nonconverged = 0;
  std::string slowest;
  constexpr int kFixtures = 100;
  for (int trial = 0; trial < kFixtures; ++trial) {
    const size_t subjects = 3 + UniformIndex(rng, 28);
    const size_t questions = 4 + UniformIndex(rng, 37);
    const Fixture f = RandomFixture(rng, subjects, questions, trial % 3 == 0 ? 0.3 : 0.0);
    const size_t k = UniformIndex(rng, subjects);
    const double shift = Uniform(rng, -20, 20);
    Observations shifted = f.obs;
    for (auto& e : shifted.entries) {
      if (e.subject == k) e.score += shift;
    }

    // Convergence at the default tolerance.
    for (const Observations* o : {&f.obs, static_cast<const Observations*>(&shifted)}) {
      const ReconstructionResult r = Reconstruct(*o);
      if (r.iterations > max_iterations) {
        double floor_weights = 0;
        for (const auto& [id, w] : r.consistency) floor_weights += w >= 4.0;
        slowest = Format("fixture %d (%zu raters x %zu questions, %g raters at the weight cap)",
                         trial, subjects, questions, floor_weights);
      }
      max_iterations = std::max(max_iterations, r.iterations);
      nonconverged += !r.converged;
    }

    // Offset invariance, free of the common-constant gauge.
    const ReconstructionResult a = Reconstruct(f.obs, tight);
    const ReconstructionResult b = Reconstruct(shifted, tight);
    double d = 0;
    for (const auto& [q, m] : a.mos) d += b.mos.at(q) - m;
    d /= static_cast<double>(a.mos.size());
    for (const auto& [q, m] : a.mos) worst_mos = std::max(worst_mos, std::fabs(b.mos.at(q) - m - d));
    for (size_t i = 0; i < subjects; ++i) {
      const auto& id = f.obs.subjects[i];
      const double expected = (i == k ? shift : 0.0) - d;
      worst_bias = std::max(worst_bias, std::fabs(b.bias.at(id) - a.bias.at(id) - expected));
    }
    const DmosTable da = ComputeDmos(a, f.questions);
    const DmosTable db = ComputeDmos(b, f.questions);
    for (const auto& [s, v] : da.dmos) worst_dmos = std::max(worst_dmos, std::fabs(db.dmos.at(s) - v));

    // Equal weights and zero bias: Latin-square residuals.
    const size_t n = 3 + UniformIndex(rng, 28);
    std::vector<double> v(n), level(n);
    double mean = 0;
    for (auto& x : v) mean += (x = Normal(rng, 0, 8));
    for (auto& x : v) x -= mean / static_cast<double>(n);
    for (auto& m : level) m = Uniform(rng, 20, 80);
    Observations latin;
    for (size_t i = 0; i < n; ++i) {
      latin.subjects.push_back(Format("r%03zu", i));
      latin.questions.push_back(Format("q%03zu", i));
    }
    for (size_t i = 0; i < n; ++i) {
      for (size_t q = 0; q < n; ++q) latin.entries.push_back({i, q, level[q] + v[(i + q) % n]});
    }
    const ReconstructionResult r = Reconstruct(latin);
    max_iterations = std::max(max_iterations, r.iterations);
    nonconverged += !r.converged;
    for (size_t q = 0; q < n; ++q) {
      double plain = 0;
      for (size_t i = 0; i < n; ++i) plain += level[q] + v[(i + q) % n];
      worst_mean = std::max(worst_mean, std::fabs(r.mos.at(latin.questions[q]) - plain / n));
    }
  }
  c.Note(Format("%d fixtures: max MOS deviation after removing the common shift %.2e, "
                "max DMOS deviation %.2e, max bias deviation %.2e, max |MOS - plain mean| "
                "%.2e, max iterations %d in %s",
                kFixtures, worst_mos, worst_dmos, worst_bias, worst_mean, max_iterations,
                slowest.c_str()));
  c.Expect(worst_mos < 1e-6, "offset invariance of MOS up to the common shift to 1e-6");
  c.Expect(worst_dmos < 1e-6, "offset invariance of DMOS to 1e-6");
  c.Expect(worst_bias < 1e-6, "shifted rater absorbs the offset in its bias to 1e-6");
  c.Expect(worst_mean < 1e-6, "equal-weight fixed point equals the plain mean to 1e-6");
  c.Expect(nonconverged == 0 && max_iterations <= 200, "convergence within 200 iterations");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 4. Beta fitting.

std::vector<double> BetaSample(Engine& rng, double a, double b, size_t n) {
  std::vector<double> xs(n);
  for (double& x : xs) x = boost::math::ibeta_inv(a, b, Uniform01(rng) * (1 - 1e-12) + 0.5e-12);
  return xs;
}

Outcome BetaFitting() {
  Checks c;
  Engine rng = DerivedEngine(2026, 4);
  const auto xs = BetaSample(rng, 2, 5, 10000);
  const BetaFit f = FitBeta(xs);
  const BetaFit m = BetaFromMoments(0.5, 0.05);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto ys = BetaSample(rng, Uniform(rng, 0.5, 8), Uniform(rng, 0.5, 8),
                               20 + UniformIndex(rng, 200));
    std::vector<double> mirrored;
    for (double y : ys) mirrored.push_back(1 - y);
    const BetaFit g = FitBeta(ys);
    const BetaFit h = FitBeta(mirrored);
    worst = std::max({worst, std::fabs(h.alpha - g.beta) / g.beta,
                      std::fabs(h.beta - g.alpha) / g.alpha});
  }
  c.Note(Format("Beta(2,5) n=10000: alpha %.4f beta %.4f (%s); moments(0.5, 0.05) -> (%.17g, "
                "%.17g); mirror max relative deviation %.2e over 50 samples",
                f.alpha, f.beta, std::string(FitMethodName(f.method)).c_str(), m.alpha, m.beta,
                worst));
  c.Expect(f.alpha >= 1.8 && f.alpha <= 2.2, "alpha in [1.8, 2.2]");
  c.Expect(f.beta >= 4.5 && f.beta <= 5.5, "beta in [4.5, 5.5]");
  c.Expect(m.alpha == 2.0 && m.beta == 2.0, "moments case exactly (2, 2)");
  c.Expect(worst < 1e-6, "mirror symmetry to 1e-6");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 5. Goodness-of-fit calibration.

Outcome GofCalibration() {
  Checks c;
  Engine rng = DerivedEngine(2026, 5);
  int passed = 0;
  for (int run = 0; run < 200; ++run) {
    const auto xs = BetaSample(rng, 2, 5, 1000);
    passed += ChiSquareGof(xs, FitBeta(xs)).passed;
  }
  std::vector<double> bimodal;
  for (int i = 0; i < 1000; ++i) {
    bimodal.push_back(std::clamp((i % 2 ? 0.95 : 0.05) + Normal(rng, 0, 0.02), 0.0, 1.0));
  }
  const GofResult g = ChiSquareGof(bimodal, BetaFit{5, 5});
  c.Note(Format("self-fitted Beta(2,5), n=1000: %d/200 passed (%.1f%%); bimodal vs Beta(5,5) "
                "p = %.3g",
                passed, passed / 2.0, g.p_value));
  c.Expect(passed >= 184 && passed <= 196, "pass rate 95% +- 3%");
  c.Expect(g.p_value < 1e-3, "bimodal rejected with p < 0.001");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 6. Correlation kernel against brute force.

Outcome CorrelationKernel() {
  Checks c;
  Engine rng = DerivedEngine(2026, 6);
  double worst = 0;
  int vectors = 0;
  while (vectors < 100) {
    const size_t n = 3 + UniformIndex(rng, 48);
    const int grid = 2 + static_cast<int>(UniformIndex(rng, 10));
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(UniformIndex(rng, grid));
      y[i] = 0.5 * x[i] + static_cast<double>(UniformIndex(rng, grid));
    }
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
        std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      continue;
    }
    ++vectors;
    const CorrelationReport r = Correlate(x, y);
    worst = std::max({worst, std::fabs(r.plcc - static_cast<double>(oracle::Pearson(x, y))),
                      std::fabs(r.srocc - static_cast<double>(oracle::Spearman(x, y))),
                      std::fabs(r.kendall_tau - static_cast<double>(oracle::KendallTauB(x, y)))});
  }
  c.Note(Format("100 tied vectors, n <= 50: max deviation %.2e", worst));
  c.Expect(worst <= 1e-12, "PLCC/SROCC/Kendall match the oracle to 1e-12");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 7. Published dataset (optional).

Outcome DatasetReplication() {
  const char* env = std::getenv("IDSQS_DATASET_DIR");
  if (env == nullptr || *env == '\0') {
    return {Verdict::kSkip, "IDSQS_DATASET_DIR not set"};
  }
  const fs::path dir(env);
  if (!fs::exists(dir / "ratings.jsonl") || !fs::exists(dir / "jnd.jsonl")) {
    return {Verdict::kSkip, "ratings.jsonl or jnd.jsonl missing in " + dir.string()};
  }
  Checks c;
  Stopwatch timer;
  PipelineManifest m;
  m.ratings = dir / "ratings.jsonl";
  if (fs::exists(dir / "config.json")) m.config = dir / "config.json";
  m.jnd = dir / "jnd.jsonl";
  m.output_dir = fs::temp_directory_path() / "idsqs_acceptance_dataset";
  m.stages = {Stage::kCleanse, Stage::kOutliers, Stage::kReconstruct,
              Stage::kBootstrap, Stage::kFitBeta, Stage::kAlign};
  m.seed = 2026;
  const PipelineReport r = RunPipeline(m);
  const AlignmentReport per_source = Align(*r.dmos, LoadJnd(*m.jnd), Grouping::kPerSource);
  const double seconds = timer.Seconds();

  const auto& pooled = r.alignment->groups.at(kPooledGroup).mapped_vs_jnd;
  c.Note(Format("threshold %.2f, %zu -> %zu -> %zu instances, GOF %d/%d passed, pooled "
                "%.3f/%.3f/%.3f, %.1f s",
                r.cleansing->threshold, r.input_instances, r.after_cleansing, r.after_outliers,
                r.fits->passed, r.fits->tested, pooled.plcc, pooled.srocc, pooled.kendall_tau,
                seconds));
  c.Expect(std::fabs(r.cleansing->threshold - 0.67) <= 0.01, "threshold ~0.67");
  c.Expect(r.input_instances == 179 && r.cleansing->discarded.size() == 104,
           "104 of 179 discarded");
  c.Expect(r.outliers->removed.size() == 12 && r.after_outliers == 63,
           "12 outliers, 63 remaining");
  c.Expect(r.fits->tested > 0 && std::fabs(r.fits->PassRate() - 0.93) <= 0.03,
           Format("GOF pass rate 93%% +- 3 pp (%d questions had >= 4 bins)", r.fits->tested));
  c.Expect(std::fabs(pooled.plcc - 0.89) <= 0.02 && std::fabs(pooled.srocc - 0.88) <= 0.02 &&
               std::fabs(pooled.kendall_tau - 0.70) <= 0.02,
           "pooled PLCC/SROCC/Kendall 0.89/0.88/0.70 +- 0.02");
  const std::map<std::string, double> expected_plcc = {
      {"src02", 0.95}, {"src06", 0.91}, {"src07", 0.92}, {"src09", 0.91}, {"src10", 0.94}};
  for (const auto& [source, expected] : expected_plcc) {
    auto it = per_source.groups.find(source);
    const double got = it == per_source.groups.end() ? NAN : it->second.mapped_vs_jnd.plcc;
    c.Note(Format("%s PLCC %.3f", source.c_str(), got));
    c.Expect(std::fabs(got - expected) <= 0.02, Format("%s PLCC %.2f +- 0.02", source.c_str(), expected));
  }
  c.Expect(seconds < 300, "runtime < 5 min");
  return c.Result();
}

// ---------------------------------------------------------------------------
// 8. Bootstrap.

Outcome Bootstrap() {
  Checks c;
  const StudyConfig config = GenerateDefaultConfig(2026);
  PopulationOptions pop;
  pop.diligent = 16;
  const GroundTruth truth = MakeGroundTruth(config, pop, 8);
  SimulationOptions sim;
  sim.batches_per_subject = 2;
  const RatingTable table = Simulate(config, truth, 8, sim);

  BootstrapOptions options;
  options.replicates = 1000;
  options.seed = 77;
  options.threads = 1;
  Stopwatch timer;
  const BootstrapCI a = BootstrapDmos(table, options);
  options.threads = 4;
  const BootstrapCI b = BootstrapDmos(table, options);
  const double seconds = timer.Seconds();
  std::ostringstream da, db;
  WriteBootstrap(a, da);
  WriteBootstrap(b, db);
  c.Expect(da.str() == db.str() && a.replicate_dmos == b.replicate_dmos,
           "byte-identical output for a fixed seed");

  bool exact_count = a.replicates == 1000;
  bool contains_median = true;
  for (const auto& [s, ci] : a.intervals) {
    const auto& values = a.replicate_dmos.at(s);
    exact_count = exact_count && values.size() == 1000;
    const double median = oracle::Quantile7(values, 0.5);
    contains_median = contains_median && ci.lo <= median && median <= ci.hi;
  }
  c.Expect(exact_count, "exactly 1000 replicates");
  c.Expect(contains_median, "every interval contains the replicate median");

  const auto qs = testing::StudyQuestions(10);
  const std::vector<double> row{5, 15, 25, 35, 45, 55, 65, 75, 85, 95, 2};
  const RatingTable constant = testing::DenseTable(std::vector(6, row), qs);
  options.replicates = 1000;
  const BootstrapCI z = BootstrapDmos(constant, options);
  double widest = 0;
  for (const auto& [s, ci] : z.intervals) widest = std::max(widest, ci.hi - ci.lo);
  c.Expect(widest == 0.0, "constant ratings give zero-width intervals");
  c.Note(Format("%zu stimuli, 2 x 1000 replicates in %.2f s; constant-input max width %.1e",
                a.intervals.size(), seconds, widest));
  return c.Result();
}

// ---------------------------------------------------------------------------
// 9. Study service contract.

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

Outcome ServiceContract() {
  Checks c;
  const StudyConfig config = GenerateDefaultConfig(2026);
  const fs::path log = testing::TempDir("acceptance_service") / "events.jsonl";
  int64_t now = 1'760'000'000'000;
  auto open = [&] {
    ServiceOptions options;
    options.log_path = log;
    options.seed = 9;
    options.clock = [&now] { return now; };
    return std::make_unique<StudyService>(config, options);
  };
  auto service = open();
  const json display = {{"width", 1920}, {"height", 1080}};
  auto start = [&](const std::string& subject) {
    const std::string id = service->CreateSession(subject, display)["session_id"];
    service->RecordGate(id, "consent", {{"accepted", true}});
    service->RecordGate(id, "acuity", {{"answers", {{"plate3", "6"}, {"plate4", "29"}}}});
    service->RecordGate(id, "training",
                        {{"responses", {{{"item_id", "train1"}, {"score", 85}},
                                        {{"item_id", "train2"}, {"score", 5}}}}});
    return id;
  };
  auto answer_batch = [&](const std::string& id) {
    for (json q = service->NextQuestion(id); q["type"] == "question";
         q = service->NextQuestion(id)) {
      now += 2000;
      service->SubmitResponse(id, {{"question_id", q["question_id"]},
                                   {"score", 20 + static_cast<int>(now / 1000 % 60)},
                                   {"toggle_count", 4},
                                   {"elapsed_ms", 2000}});
    }
  };

  // Break gate.
  const std::string a = start("w1");
  answer_batch(a);
  const Session at_break = *service->FindSession(a);
  const std::string batch2_first = at_break.question_order[1][0];
  now += 179'999;
  const json brk = service->NextQuestion(a);
  c.Expect(brk["type"] == "break", "break directive before 180 s");
  c.Expect(CodeOf([&] { service->SubmitResponse(a, {{"question_id", batch2_first}, {"score", 50}}); }) ==
               ErrorCode::kPhaseViolation,
           "batch-2 response rejected before 180 s");
  c.Expect(CodeOf([&] { service->RecordGate(a, "break", {{"continue", true}}); }) ==
               ErrorCode::kPhaseViolation,
           "continue rejected before 180 s");
  now += 1;
  const json q2 = service->NextQuestion(a);
  c.Expect(q2["type"] == "question" && q2["question_id"] == batch2_first,
           "batch 2 opens at 180 s");
  answer_batch(a);

  // Admission.
  c.Expect(CodeOf([&] { service->CreateSession("w1", display); }) == ErrorCode::kDuplicateSubject,
           "duplicate subject rejected");
  c.Expect(CodeOf([&] { service->CreateSession("w2", {{"width", 1366}, {"height", 768}}); }) ==
               ErrorCode::kInsufficientDisplay,
           "1366x768 rejected");

  // More state: one partial session, one rejected.
  const std::string b = start("w3");
  for (int i = 0; i < 10; ++i) {
    const json q = service->NextQuestion(b);
    service->SubmitResponse(b, {{"question_id", q["question_id"]}, {"score", 33.5}});
  }
  const std::string rejected = service->CreateSession("w4", display)["session_id"];
  (void)CodeOf([&] { service->RecordGate(rejected, "consent", {{"accepted", false}}); });

  // Replay and export.
  const std::vector<Session> before = service->Sessions();
  const auto counts = service->AssignmentCounts();
  const std::string export1 = service->ExportRatings(config.study_id);
  const std::string export2 = service->ExportRatings(config.study_id);
  service = open();
  c.Expect(service->Sessions() == before, "replay reconstructs every session exactly");
  c.Expect(service->AssignmentCounts() == counts, "replay restores assignment counts");
  const std::string export3 = service->ExportRatings(config.study_id);
  c.Expect(export1 == export2 && export2 == export3, "export idempotent across calls and restart");
  std::istringstream in(export1);
  const RatingTable exported = ReadRatings(in);
  c.Note(Format("%zu sessions replayed; export holds %zu ratings in %zu completed instances",
                before.size(), exported.ratings.size(), exported.instances.size()));
  c.Expect(exported.instances.size() == 2 && exported.ratings.size() == 178,
           "export holds the two completed batch instances");
  return c.Result();
}

struct Criterion {
  int number;
  const char* name;
  Outcome (*run)();
};

}  // namespace
}  // namespace idsqs

int main() {
  using namespace idsqs;
  const Criterion criteria[] = {
      {1, "oracle recovery", OracleRecovery},
      {2, "screening recall", ScreeningRecall},
      {3, "fixed-point invariances", FixedPointProperties},
      {4, "beta fitting", BetaFitting},
      {5, "GOF calibration", GofCalibration},
      {6, "correlation kernel", CorrelationKernel},
      {7, "dataset replication", DatasetReplication},
      {8, "bootstrap", Bootstrap},
      {9, "service contract", ServiceContract},
  };
  int failures = 0;
  for (const Criterion& criterion : criteria) {
    Outcome o;
    try {
      o = criterion.run();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::kPass   ? "PASS"
                      : o.verdict == Verdict::kSkip ? "SKIP"
                                                    : "FAIL";
    failures += o.verdict == Verdict::kFail;
    std::printf("%s %d %s: %s\n", tag, criterion.number, criterion.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
