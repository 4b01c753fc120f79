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

#include "idsqs/simulator.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "idsqs/error.h"
#include "idsqs/numerics.h"
#include "idsqs/random.h"
#include "json.hpp"

namespace idsqs {

using nlohmann::json;

namespace {

std::string SubjectName(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%03d", index);
  return buf;
}

}  // namespace

std::string_view RaterKindName(RaterKind kind) {
  return kind == RaterKind::kDiligent ? "DILIGENT" : "RANDOM_CLICKER";
}

GroundTruth MakeGroundTruth(const StudyConfig& config,
                            const PopulationOptions& population,
                            uint64_t seed) {
  GroundTruth truth;
  Engine rng = DerivedEngine(seed, 0);
  std::map<std::pair<std::string, Codec>, double> slope;
  auto slope_of = [&](const Stimulus& s) {
    auto [it, inserted] = slope.try_emplace({s.source_id, s.codec}, 0.0);
    if (inserted) it->second = Uniform(rng, 0.6, 1.0);
    return it->second;
  };
  for (const auto& [id, q] : config.questions) {
    for (const Stimulus& s : {q.reference, q.test}) {
      if (truth.true_quality.contains(s)) continue;
      truth.true_quality.emplace(
          s, s.IsPristine() ? 0.0 : 9.0 * s.distortion_level * slope_of(s));
    }
  }

  Engine people = DerivedEngine(seed, 1);
  int index = 0;
  for (int i = 0; i < population.diligent; ++i) {
    RaterProfile p;
    p.kind = RaterKind::kDiligent;
    p.bias = Normal(people, 0.0, population.bias_sd);
    p.residual_sd = Uniform(people, population.residual_sd_lo,
                            population.residual_sd_hi);
    truth.profiles.emplace(SubjectName(++index), p);
  }
  for (int i = 0; i < population.clickers; ++i) {
    RaterProfile p;
    p.kind = RaterKind::kRandomClicker;
    p.residual_sd = 0.0;
    truth.profiles.emplace(SubjectName(++index), p);
  }
  return truth;
}

RatingTable Simulate(const StudyConfig& config, const GroundTruth& truth,
                     uint64_t seed, const SimulationOptions& options) {
  if (config.batches.empty()) {
    Fail(ErrorCode::kInvalidArgument, "config defines no batches");
  }
  for (const auto& batch : config.batches) {
    for (const auto& qid : batch.question_ids) {
      auto it = config.questions.find(qid);
      if (it == config.questions.end()) Fail(ErrorCode::kDanglingReference, qid);
      if (!truth.true_quality.contains(it->second.test)) {
        Fail(ErrorCode::kCoverageGap, it->second.test.Key());
      }
    }
  }

  std::vector<Rating> ratings;
  const size_t num_batches = config.batches.size();
  const auto per_subject = static_cast<size_t>(
      std::clamp<int>(options.batches_per_subject, 1,
                      static_cast<int>(num_batches)));
  size_t k = 0;
  int64_t clock = options.start_timestamp;
  for (const auto& [subject, profile] : truth.profiles) {
    Engine rng = DerivedEngine(seed, k + 1);
    for (size_t j = 0; j < per_subject; ++j) {
      const BatchDef& batch = config.batches[(k * per_subject + j) % num_batches];
      std::vector<std::string> order = batch.question_ids;
      Shuffle(order, rng);
      const std::string instance = subject + "-" + batch.batch_id;
      for (const auto& qid : order) {
        const Question& q = config.questions.at(qid);
        double score;
        const bool on_model = profile.kind == RaterKind::kDiligent &&
                              Uniform01(rng) < profile.attention;
        if (on_model) {
          const double noise = profile.residual_sd > 0.0
                                   ? Normal(rng, 0.0, profile.residual_sd)
                                   : 0.0;
          score = std::clamp(truth.true_quality.at(q.test) + profile.bias +
                                 noise,
                             kMinScore, kMaxScore);
        } else {
          score = Uniform(rng, kMinScore, kMaxScore);
        }
        Rating r;
        r.subject_id = subject;
        r.batch_instance_id = instance;
        r.batch_id = batch.batch_id;
        r.question_id = qid;
        r.score = score;
        r.toggle_count = static_cast<int64_t>(UniformIndex(rng, 12));
        r.elapsed_ms = 2000 + static_cast<int64_t>(UniformIndex(rng, 15000));
        clock += r.elapsed_ms;
        r.timestamp = clock;
        ratings.push_back(std::move(r));
      }
    }
    ++k;
  }

  std::map<std::string, Question> questions;
  std::map<std::string, BatchDef> batches;
  for (const auto& batch : config.batches) {
    batches.emplace(batch.batch_id, batch);
    for (const auto& qid : batch.question_ids) {
      questions.emplace(qid, config.questions.at(qid));
    }
  }
  return RatingTable::Build(std::move(questions), std::move(batches),
                            std::move(ratings));
}

RecoveryMetrics EvaluateRecovery(
    const GroundTruth& truth, const ReconstructionResult& result,
    const std::map<std::string, Question>& questions) {
  RecoveryMetrics m;
  std::vector<double> expected;
  std::vector<double> estimated;
  for (const auto& [qid, mos] : result.mos) {
    auto q = questions.find(qid);
    if (q == questions.end()) continue;
    auto t = truth.true_quality.find(q->second.test);
    if (t == truth.true_quality.end()) continue;
    expected.push_back(t->second);
    estimated.push_back(mos);
  }
  m.questions = expected.size();
  double sq = 0.0;
  for (size_t i = 0; i < expected.size(); ++i) {
    sq += (expected[i] - estimated[i]) * (expected[i] - estimated[i]);
  }
  m.rmse = expected.empty() ? 0.0 : std::sqrt(sq / expected.size());
  try {
    m.plcc = Pearson(expected, estimated);
  } catch (const Error&) {
    m.plcc = std::nan("");
  }

  std::vector<double> injected;
  std::vector<double> recovered;
  for (const auto& [subject, bias] : result.bias) {
    auto p = truth.profiles.find(subject);
    if (p == truth.profiles.end() || p->second.kind != RaterKind::kDiligent) {
      continue;
    }
    injected.push_back(p->second.bias);
    recovered.push_back(bias);
  }
  m.subjects = injected.size();
  try {
    m.bias_corr = Pearson(injected, recovered);
  } catch (const Error&) {
    m.bias_corr = std::nan("");
  }
  return m;
}

void WriteGroundTruth(const GroundTruth& truth, std::ostream& out) {
  for (const auto& [s, quality] : truth.true_quality) {
    out << json{{"record", "truth"},
                {"source_id", s.source_id},
                {"codec", std::string(CodecName(s.codec))},
                {"distortion_level", s.distortion_level},
                {"quality", quality}}
               .dump()
        << '\n';
  }
  for (const auto& [subject, p] : truth.profiles) {
    out << json{{"record", "profile"},
                {"subject_id", subject},
                {"kind", std::string(RaterKindName(p.kind))},
                {"bias", p.bias},
                {"residual_sd", p.residual_sd},
                {"attention", p.attention}}
               .dump()
        << '\n';
  }
}

void SaveGroundTruth(const GroundTruth& truth,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  WriteGroundTruth(truth, out);
}

GroundTruth LoadGroundTruth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  GroundTruth truth;
  std::string text;
  size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    try {
      const json j = json::parse(text);
      const auto record = j.at("record").get<std::string>();
      if (record == "truth") {
        auto codec = ParseCodec(j.at("codec").get<std::string>());
        if (!codec) throw std::invalid_argument("unknown codec");
        truth.true_quality.emplace(
            Stimulus{j.at("source_id").get<std::string>(), *codec,
                     j.at("distortion_level").get<int>()},
            j.at("quality").get<double>());
      } else if (record == "profile") {
        RaterProfile p;
        p.kind = j.at("kind").get<std::string>() == "RANDOM_CLICKER"
                     ? RaterKind::kRandomClicker
                     : RaterKind::kDiligent;
        p.bias = j.at("bias").get<double>();
        p.residual_sd = j.at("residual_sd").get<double>();
        p.attention = j.value("attention", 1.0);
        truth.profiles.emplace(j.at("subject_id").get<std::string>(), p);
      }
    } catch (const std::exception& e) {
      Fail(ErrorCode::kMalformedRecord,
           "line " + std::to_string(line) + ": " + e.what());
    }
  }
  return truth;
}

}  // namespace idsqs
