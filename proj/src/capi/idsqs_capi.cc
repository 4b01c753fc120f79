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

#include "idsqs/idsqs.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <string>

#include "idsqs/alignment.h"
#include "idsqs/distfit.h"
#include "idsqs/domain.h"
#include "idsqs/error.h"
#include "idsqs/numerics.h"
#include "idsqs/pipeline.h"
#include "idsqs/reconstruction.h"
#include "idsqs/reports.h"
#include "idsqs/screening.h"
#include "idsqs/server.h"
#include "idsqs/service.h"
#include "idsqs/simulator.h"
#include "json.hpp"

struct idsqs_config {
  idsqs::StudyConfig value;
};
struct idsqs_table {
  idsqs::RatingTable value;
};
struct idsqs_truth {
  idsqs::GroundTruth value;
};
struct idsqs_cleansing {
  idsqs::CleansingReport value;
};
struct idsqs_outliers {
  idsqs::OutlierReport value;
};
struct idsqs_reconstruction {
  idsqs::ReconstructionResult value;
};
struct idsqs_dmos {
  idsqs::DmosTable value;
};
struct idsqs_bootstrap {
  idsqs::BootstrapCI value;
};
struct idsqs_fits {
  idsqs::FitSummary value;
};
struct idsqs_jnd {
  idsqs::JndTable value;
};
struct idsqs_alignment {
  idsqs::AlignmentReport value;
};
struct idsqs_service {
  std::unique_ptr<idsqs::StudyService> value;
};

namespace {

using idsqs::ErrorCode;
using nlohmann::json;

thread_local std::string last_error;

idsqs_status Record(ErrorCode code, const std::string& message) {
  last_error = message;
  return static_cast<idsqs_status>(code);
}

// Runs `fn`, translating exceptions to status codes.
template <typename Fn>
idsqs_status Call(Fn&& fn) {
  try {
    fn();
    return IDSQS_OK;
  } catch (const idsqs::Error& e) {
    return Record(e.code(), e.what());
  } catch (const json::exception& e) {
    return Record(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::bad_alloc&) {
    return Record(ErrorCode::kInternal, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return Record(ErrorCode::kIo, e.what());
  } catch (const std::exception& e) {
    return Record(ErrorCode::kInternal, e.what());
  }
}

template <typename... Ptrs>
void Require(const Ptrs*... ptrs) {
  if (((ptrs == nullptr) || ...)) {
    idsqs::Fail(ErrorCode::kInvalidArgument, "null argument");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

template <typename Writer>
void WriteTo(const char* path, Writer&& writer) {
  Require(path);
  idsqs::WriteFile(path, writer);
}

// Service calls report errors both as status and as a JSON body.
template <typename Fn>
idsqs_status ServiceCall(char** out, Fn&& fn) {
  try {
    const std::string body = fn();
    if (out != nullptr) *out = Dup(body);
    return IDSQS_OK;
  } catch (const idsqs::Error& e) {
    json detail = json::object();
    if (auto* se = dynamic_cast<const idsqs::ServiceError*>(&e)) {
      detail = se->detail();
    }
    if (out != nullptr) {
      *out = Dup(json{{"error",
                       {{"code", idsqs::ErrorCodeName(e.code())},
                        {"status", static_cast<int>(e.code())},
                        {"message", e.what()},
                        {"detail", detail}}}}
                     .dump());
    }
    return Record(e.code(), e.what());
  } catch (const json::exception& e) {
    if (out != nullptr) *out = nullptr;
    return Record(ErrorCode::kInvalidArgument, e.what());
  } catch (const std::exception& e) {
    if (out != nullptr) *out = nullptr;
    return Record(ErrorCode::kInternal, e.what());
  }
}

json ParseOr(const char* text, json fallback) {
  if (text == nullptr || *text == '\0') return fallback;
  return json::parse(text);
}

}  // namespace

extern "C" {

const char* idsqs_status_name(idsqs_status status) {
  if (status == IDSQS_OK) return "OK";
  return idsqs::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

const char* idsqs_last_error(void) { return last_error.c_str(); }

const char* idsqs_version(void) { return "1.0.0"; }

void idsqs_string_free(char* s) { std::free(s); }

idsqs_status idsqs_config_generate(uint64_t seed, idsqs_config** out) {
  return Call([&] {
    Require(out);
    *out = new idsqs_config{idsqs::GenerateDefaultConfig(seed)};
  });
}

idsqs_status idsqs_config_load(const char* path, idsqs_config** out) {
  return Call([&] {
    Require(path, out);
    *out = new idsqs_config{idsqs::LoadStudyConfig(path)};
  });
}

idsqs_status idsqs_config_save(const idsqs_config* config, const char* path) {
  return Call([&] {
    Require(config, path);
    idsqs::SaveStudyConfig(config->value, path);
  });
}

idsqs_status idsqs_config_validate(const idsqs_config* config,
                                   const char* base_dir, int check_assets,
                                   char** violations_json, size_t* count) {
  return Call([&] {
    Require(config);
    idsqs::ValidationOptions options;
    options.check_assets = check_assets != 0;
    if (base_dir != nullptr) options.base_dir = base_dir;
    const auto violations = idsqs::ValidateStudyConfig(config->value, options);
    if (count != nullptr) *count = violations.size();
    if (violations_json != nullptr) {
      json arr = json::array();
      for (const auto& v : violations) {
        arr.push_back({{"kind", idsqs::ViolationKindName(v.kind)},
                       {"subject", v.subject},
                       {"detail", v.detail}});
      }
      *violations_json = Dup(arr.dump());
    }
  });
}

void idsqs_config_free(idsqs_config* config) { delete config; }

idsqs_status idsqs_table_load(const char* path, const idsqs_config* config,
                              idsqs_table** out) {
  return Call([&] {
    Require(path, out);
    *out = new idsqs_table{
        idsqs::LoadRatings(path, config != nullptr ? &config->value : nullptr)};
  });
}

idsqs_status idsqs_table_save(const idsqs_table* table, const char* path) {
  return Call([&] {
    Require(table, path);
    idsqs::SaveRatings(table->value, path);
  });
}

idsqs_status idsqs_table_counts(const idsqs_table* table, size_t* ratings,
                                size_t* instances, size_t* subjects,
                                size_t* questions) {
  return Call([&] {
    Require(table);
    const auto& t = table->value;
    if (ratings != nullptr) *ratings = t.ratings.size();
    if (instances != nullptr) *instances = t.instances.size();
    if (subjects != nullptr) *subjects = t.SubjectIds().size();
    if (questions != nullptr) *questions = t.questions.size();
  });
}

void idsqs_table_free(idsqs_table* table) { delete table; }

void idsqs_population_default(idsqs_population* population) {
  if (population == nullptr) return;
  const idsqs::PopulationOptions pop;
  const idsqs::SimulationOptions sim;
  population->diligent = pop.diligent;
  population->random_clickers = pop.clickers;
  population->bias_sd = pop.bias_sd;
  population->residual_sd_lo = pop.residual_sd_lo;
  population->residual_sd_hi = pop.residual_sd_hi;
  population->batches_per_subject = sim.batches_per_subject;
}

idsqs_status idsqs_simulate(const idsqs_config* config,
                            const idsqs_population* population, uint64_t seed,
                            idsqs_table** table, idsqs_truth** truth) {
  return Call([&] {
    Require(config, table);
    idsqs_population p;
    idsqs_population_default(&p);
    if (population != nullptr) p = *population;
    if (p.diligent < 0 || p.random_clickers < 0 || p.bias_sd < 0.0 ||
        p.residual_sd_lo < 0.0 || p.residual_sd_hi < p.residual_sd_lo ||
        p.batches_per_subject < 1) {
      idsqs::Fail(ErrorCode::kInvalidArgument, "invalid population");
    }
    idsqs::PopulationOptions pop;
    pop.diligent = p.diligent;
    pop.clickers = p.random_clickers;
    pop.bias_sd = p.bias_sd;
    pop.residual_sd_lo = p.residual_sd_lo;
    pop.residual_sd_hi = p.residual_sd_hi;
    idsqs::SimulationOptions sim;
    sim.batches_per_subject = p.batches_per_subject;
    auto gt = std::make_unique<idsqs_truth>(
        idsqs_truth{idsqs::MakeGroundTruth(config->value, pop, seed)});
    auto tb = std::make_unique<idsqs_table>(
        idsqs_table{idsqs::Simulate(config->value, gt->value, seed, sim)});
    *table = tb.release();
    if (truth != nullptr) *truth = gt.release();
  });
}

idsqs_status idsqs_truth_save(const idsqs_truth* truth, const char* path) {
  return Call([&] {
    Require(truth, path);
    idsqs::SaveGroundTruth(truth->value, path);
  });
}

idsqs_status idsqs_truth_load(const char* path, idsqs_truth** out) {
  return Call([&] {
    Require(path, out);
    *out = new idsqs_truth{idsqs::LoadGroundTruth(path)};
  });
}

void idsqs_truth_free(idsqs_truth* truth) { delete truth; }

idsqs_status idsqs_cleanse(const idsqs_table* table, int bins,
                           idsqs_cleansing** out) {
  return Call([&] {
    Require(table, out);
    *out = new idsqs_cleansing{idsqs::Cleanse(table->value, bins)};
  });
}

idsqs_status idsqs_cleansing_info(const idsqs_cleansing* report,
                                  double* threshold, size_t* kept,
                                  size_t* discarded) {
  return Call([&] {
    Require(report);
    if (threshold != nullptr) *threshold = report->value.threshold;
    if (kept != nullptr) *kept = report->value.kept.size();
    if (discarded != nullptr) *discarded = report->value.discarded.size();
  });
}

idsqs_status idsqs_cleansing_apply(const idsqs_cleansing* report,
                                   const idsqs_table* table,
                                   idsqs_table** out) {
  return Call([&] {
    Require(report, table, out);
    *out = new idsqs_table{table->value.Restrict(report->value.kept)};
  });
}

idsqs_status idsqs_cleansing_write(const idsqs_cleansing* report,
                                   const char* path) {
  return Call([&] {
    Require(report);
    WriteTo(path, [&](std::ostream& o) {
      idsqs::WriteCleansingReport(report->value, o);
    });
  });
}

void idsqs_cleansing_free(idsqs_cleansing* report) { delete report; }

idsqs_status idsqs_remove_outliers(const idsqs_table* table,
                                   idsqs_outliers** out) {
  return Call([&] {
    Require(table, out);
    *out = new idsqs_outliers{
        idsqs::RemoveOutliers(table->value, table->value.InstanceIds())};
  });
}

idsqs_status idsqs_outliers_info(const idsqs_outliers* report, double* cutoff,
                                 size_t* kept, size_t* removed) {
  return Call([&] {
    Require(report);
    if (cutoff != nullptr) *cutoff = report->value.cutoff;
    if (kept != nullptr) *kept = report->value.kept.size();
    if (removed != nullptr) *removed = report->value.removed.size();
  });
}

idsqs_status idsqs_outliers_apply(const idsqs_outliers* report,
                                  const idsqs_table* table, idsqs_table** out) {
  return Call([&] {
    Require(report, table, out);
    *out = new idsqs_table{table->value.Restrict(report->value.kept)};
  });
}

idsqs_status idsqs_outliers_write(const idsqs_outliers* report,
                                  const char* path) {
  return Call([&] {
    Require(report);
    WriteTo(path, [&](std::ostream& o) {
      idsqs::WriteOutlierReport(report->value, o);
    });
  });
}

void idsqs_outliers_free(idsqs_outliers* report) { delete report; }

idsqs_status idsqs_reconstruct(const idsqs_table* table, double epsilon,
                               int max_iter, idsqs_reconstruction** out) {
  return Call([&] {
    Require(table, out);
    if (!(epsilon > 0.0) || max_iter < 1) {
      idsqs::Fail(ErrorCode::kInvalidArgument,
                  "epsilon must be positive and max_iter at least 1");
    }
    idsqs::ReconstructionOptions options;
    options.epsilon = epsilon;
    options.max_iter = max_iter;
    *out = new idsqs_reconstruction{idsqs::Reconstruct(table->value, options)};
  });
}

idsqs_status idsqs_reconstruction_info(const idsqs_reconstruction* result,
                                       int* iterations, int* converged,
                                       double* final_delta) {
  return Call([&] {
    Require(result);
    if (iterations != nullptr) *iterations = result->value.iterations;
    if (converged != nullptr) *converged = result->value.converged ? 1 : 0;
    if (final_delta != nullptr) *final_delta = result->value.final_delta;
  });
}

idsqs_status idsqs_reconstruction_write(const idsqs_reconstruction* result,
                                        const char* path) {
  return Call([&] {
    Require(result);
    WriteTo(path, [&](std::ostream& o) {
      idsqs::WriteReconstruction(result->value, o);
    });
  });
}

idsqs_status idsqs_reconstruction_recovery(const idsqs_reconstruction* result,
                                           const idsqs_truth* truth,
                                           const idsqs_table* table,
                                           double* rmse, double* plcc,
                                           double* bias_corr) {
  return Call([&] {
    Require(result, truth, table);
    const auto m = idsqs::EvaluateRecovery(truth->value, result->value,
                                           table->value.questions);
    if (rmse != nullptr) *rmse = m.rmse;
    if (plcc != nullptr) *plcc = m.plcc;
    if (bias_corr != nullptr) *bias_corr = m.bias_corr;
  });
}

void idsqs_reconstruction_free(idsqs_reconstruction* result) { delete result; }

idsqs_status idsqs_dmos_compute(const idsqs_reconstruction* result,
                                const idsqs_table* table, idsqs_dmos** out) {
  return Call([&] {
    Require(result, table, out);
    *out = new idsqs_dmos{
        idsqs::ComputeDmos(result->value, table->value.questions)};
  });
}

idsqs_status idsqs_dmos_load(const char* path, idsqs_dmos** out) {
  return Call([&] {
    Require(path, out);
    *out = new idsqs_dmos{idsqs::LoadDmos(path)};
  });
}

idsqs_status idsqs_dmos_write(const idsqs_dmos* dmos, const char* path) {
  return Call([&] {
    Require(dmos);
    WriteTo(path, [&](std::ostream& o) { idsqs::WriteDmos(dmos->value, o); });
  });
}

size_t idsqs_dmos_count(const idsqs_dmos* dmos) {
  return dmos == nullptr ? 0 : dmos->value.dmos.size();
}

idsqs_status idsqs_dmos_write_series(const idsqs_dmos* dmos,
                                     const idsqs_bootstrap* ci,
                                     const char* path) {
  return Call([&] {
    Require(dmos);
    WriteTo(path, [&](std::ostream& o) {
      idsqs::WriteDmosSeries(dmos->value, ci != nullptr ? &ci->value : nullptr,
                             o);
    });
  });
}

void idsqs_dmos_free(idsqs_dmos* dmos) { delete dmos; }

idsqs_status idsqs_bootstrap_run(const idsqs_table* table, int replicates,
                                 double level, uint64_t seed, unsigned threads,
                                 idsqs_bootstrap** out) {
  return Call([&] {
    Require(table, out);
    idsqs::BootstrapOptions options;
    options.replicates = replicates;
    options.level = level;
    options.seed = seed;
    options.threads = threads;
    *out = new idsqs_bootstrap{idsqs::BootstrapDmos(table->value, options)};
  });
}

idsqs_status idsqs_bootstrap_write(const idsqs_bootstrap* ci,
                                   const char* path) {
  return Call([&] {
    Require(ci);
    WriteTo(path,
            [&](std::ostream& o) { idsqs::WriteBootstrap(ci->value, o); });
  });
}

void idsqs_bootstrap_free(idsqs_bootstrap* ci) { delete ci; }

idsqs_status idsqs_fit_beta_all(const idsqs_table* table, double significance,
                                idsqs_fits** out) {
  return Call([&] {
    Require(table, out);
    if (!(significance > 0.0 && significance < 1.0)) {
      idsqs::Fail(ErrorCode::kInvalidArgument,
                  "significance must lie in (0, 1)");
    }
    *out = new idsqs_fits{
        idsqs::FitAllQuestions(table->value, {}, significance)};
  });
}

idsqs_status idsqs_fits_info(const idsqs_fits* fits, int* fitted, int* tested,
                             int* passed) {
  return Call([&] {
    Require(fits);
    if (fitted != nullptr) *fitted = fits->value.fitted;
    if (tested != nullptr) *tested = fits->value.tested;
    if (passed != nullptr) *passed = fits->value.passed;
  });
}

idsqs_status idsqs_fits_write(const idsqs_fits* fits, const char* path) {
  return Call([&] {
    Require(fits);
    WriteTo(path, [&](std::ostream& o) { idsqs::WriteFits(fits->value, o); });
  });
}

idsqs_status idsqs_fits_write_scatter(const idsqs_fits* fits,
                                      const char* path) {
  return Call([&] {
    Require(fits);
    WriteTo(path,
            [&](std::ostream& o) { idsqs::WriteFitScatter(fits->value, o); });
  });
}

void idsqs_fits_free(idsqs_fits* fits) { delete fits; }

idsqs_status idsqs_fit_beta(const double* scores, size_t n, double* alpha,
                            double* beta) {
  return Call([&] {
    Require(scores, alpha, beta);
    std::vector<double> unit(n);
    for (size_t i = 0; i < n; ++i) {
      if (!(scores[i] >= 0.0 && scores[i] <= 100.0)) {
        idsqs::Fail(ErrorCode::kScoreOutOfRange, "score outside [0, 100]");
      }
      unit[i] = scores[i] / 100.0;
    }
    const idsqs::BetaFit fit = idsqs::FitBeta(unit);
    *alpha = fit.alpha;
    *beta = fit.beta;
  });
}

idsqs_status idsqs_jnd_load(const char* path, idsqs_jnd** out) {
  return Call([&] {
    Require(path, out);
    *out = new idsqs_jnd{idsqs::LoadJnd(path)};
  });
}

void idsqs_jnd_free(idsqs_jnd* jnd) { delete jnd; }

idsqs_status idsqs_align(const idsqs_dmos* dmos, const idsqs_jnd* jnd,
                         const char* grouping, idsqs_alignment** out) {
  return Call([&] {
    Require(dmos, jnd, out);
    idsqs::Grouping g = idsqs::Grouping::kPooled;
    if (grouping != nullptr) {
      auto parsed = idsqs::ParseGrouping(grouping);
      if (!parsed) {
        idsqs::Fail(ErrorCode::kInvalidArgument,
                    std::string("unknown grouping ") + grouping);
      }
      g = *parsed;
    }
    *out = new idsqs_alignment{idsqs::Align(dmos->value, jnd->value, g)};
  });
}

idsqs_status idsqs_alignment_group(const idsqs_alignment* report,
                                   const char* group, double* plcc,
                                   double* srocc, double* kendall_tau) {
  return Call([&] {
    Require(report, group);
    auto it = report->value.groups.find(group);
    if (it == report->value.groups.end()) {
      idsqs::Fail(ErrorCode::kInvalidArgument,
                  std::string("no alignment group ") + group);
    }
    const auto& c = it->second.mapped_vs_jnd;
    if (plcc != nullptr) *plcc = c.plcc;
    if (srocc != nullptr) *srocc = c.srocc;
    if (kendall_tau != nullptr) *kendall_tau = c.kendall_tau;
  });
}

idsqs_status idsqs_alignment_write(const idsqs_alignment* report,
                                   const char* path) {
  return Call([&] {
    Require(report);
    WriteTo(path,
            [&](std::ostream& o) { idsqs::WriteAlignment(report->value, o); });
  });
}

idsqs_status idsqs_alignment_write_scatter(const idsqs_alignment* report,
                                           const char* path) {
  return Call([&] {
    Require(report);
    WriteTo(path, [&](std::ostream& o) {
      idsqs::WriteAlignmentScatter(report->value, o);
    });
  });
}

void idsqs_alignment_free(idsqs_alignment* report) { delete report; }

#define IDSQS_SUMMARY(fn, type)                          \
  idsqs_status fn(const type* r, char** out) {           \
    return Call([&] {                                    \
      Require(r, out);                                   \
      *out = Dup(idsqs::Summarize(r->value));            \
    });                                                  \
  }

IDSQS_SUMMARY(idsqs_cleansing_summary, idsqs_cleansing)
IDSQS_SUMMARY(idsqs_outliers_summary, idsqs_outliers)
IDSQS_SUMMARY(idsqs_reconstruction_summary, idsqs_reconstruction)
IDSQS_SUMMARY(idsqs_bootstrap_summary, idsqs_bootstrap)
IDSQS_SUMMARY(idsqs_fits_summary, idsqs_fits)
IDSQS_SUMMARY(idsqs_alignment_summary, idsqs_alignment)

#undef IDSQS_SUMMARY

idsqs_status idsqs_pipeline_run(const char* manifest_path, char** summary) {
  return Call([&] {
    Require(manifest_path);
    const auto report = idsqs::RunPipeline(idsqs::LoadManifest(manifest_path));
    if (summary != nullptr) *summary = Dup(report.summary);
  });
}

idsqs_status idsqs_pearson(const double* x, const double* y, size_t n,
                           double* out) {
  return Call([&] {
    Require(x, y, out);
    *out = idsqs::Pearson({x, n}, {y, n});
  });
}

idsqs_status idsqs_spearman(const double* x, const double* y, size_t n,
                            double* out) {
  return Call([&] {
    Require(x, y, out);
    *out = idsqs::Spearman({x, n}, {y, n});
  });
}

idsqs_status idsqs_kendall_tau_b(const double* x, const double* y, size_t n,
                                 double* out) {
  return Call([&] {
    Require(x, y, out);
    *out = idsqs::KendallTauB({x, n}, {y, n});
  });
}

idsqs_status idsqs_otsu_threshold(const double* values, size_t n, int bins,
                                  double* out) {
  return Call([&] {
    Require(values, out);
    *out = idsqs::OtsuThreshold({values, n}, bins);
  });
}

idsqs_status idsqs_service_open(const idsqs_config* config,
                                const char* log_path, int has_seed,
                                uint64_t seed, idsqs_service** out) {
  return Call([&] {
    Require(config, log_path, out);
    idsqs::ServiceOptions options;
    options.log_path = log_path;
    if (has_seed != 0) options.seed = seed;
    *out = new idsqs_service{
        std::make_unique<idsqs::StudyService>(config->value, options)};
  });
}

idsqs_status idsqs_service_create_session(idsqs_service* service,
                                          const char* subject_id,
                                          const char* client_json,
                                          char** out) {
  return ServiceCall(out, [&] {
    Require(service, subject_id);
    return service->value
        ->CreateSession(subject_id, ParseOr(client_json, json::object()))
        .dump();
  });
}

idsqs_status idsqs_service_next(idsqs_service* service, const char* session_id,
                                char** out) {
  return ServiceCall(out, [&] {
    Require(service, session_id);
    return service->value->NextQuestion(session_id).dump();
  });
}

idsqs_status idsqs_service_submit(idsqs_service* service,
                                  const char* session_id,
                                  const char* response_json, char** out) {
  return ServiceCall(out, [&] {
    Require(service, session_id, response_json);
    return service->value
        ->SubmitResponse(session_id, json::parse(response_json))
        .dump();
  });
}

idsqs_status idsqs_service_gate(idsqs_service* service, const char* session_id,
                                const char* gate, const char* payload_json,
                                char** out) {
  return ServiceCall(out, [&] {
    Require(service, session_id, gate);
    return service->value
        ->RecordGate(session_id, gate, ParseOr(payload_json, json::object()))
        .dump();
  });
}

idsqs_status idsqs_service_export(idsqs_service* service, const char* study_id,
                                  int include_partial, char** out) {
  return ServiceCall(out, [&] {
    Require(service, study_id);
    return service->value->ExportRatings(study_id, include_partial != 0);
  });
}

idsqs_status idsqs_service_serve(idsqs_service* service, const char* base_dir,
                                 const char* host, int port) {
  return Call([&] {
    Require(service, host);
    idsqs::StudyServer server(*service->value,
                              base_dir != nullptr ? base_dir : ".");
    if (!server.Listen(host, port)) {
      idsqs::Fail(ErrorCode::kIo, std::string("cannot listen on ") + host +
                                      ":" + std::to_string(port));
    }
  });
}

void idsqs_service_free(idsqs_service* service) { delete service; }

}  // extern "C"
