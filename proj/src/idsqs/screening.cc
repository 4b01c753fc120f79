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

#include "idsqs/screening.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "idsqs/error.h"

namespace idsqs {

double TrapAccuracy(double score, QuestionKind kind) {
  switch (kind) {
    case QuestionKind::kTrapI: return score / kMaxScore;
    case QuestionKind::kTrapII: return 1.0 - score / kMaxScore;
    case QuestionKind::kStudy: break;
  }
  Fail(ErrorCode::kNotATrap, "accuracy is defined for trap questions only");
}

CleansingReport Cleanse(const RatingTable& table, int bins) {
  CleansingReport report;
  report.bins = bins;
  std::vector<double> accuracies;
  for (const auto& [id, inst] : table.instances) {
    double sum = 0.0;
    int traps = 0;
    for (size_t index : inst.ratings) {
      const Rating& r = table.ratings[index];
      const Question& q = table.questions.at(r.question_id);
      if (!IsTrap(q.kind)) continue;
      sum += TrapAccuracy(r.score, q.kind);
      ++traps;
    }
    if (traps == 0) Fail(ErrorCode::kNoTrapQuestions, id);
    const double accuracy = sum / traps;
    report.accuracy.emplace(id, accuracy);
    accuracies.push_back(accuracy);
  }
  report.threshold = OtsuThreshold(accuracies, bins);
  for (const auto& [id, accuracy] : report.accuracy) {
    (accuracy >= report.threshold ? report.kept : report.discarded).insert(id);
  }
  return report;
}

OutlierReport RemoveOutliers(const RatingTable& table, const IdSet& kept) {
  if (kept.empty()) {
    Fail(ErrorCode::kInvalidArgument, "outlier removal needs kept instances");
  }
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& id : kept) {
    auto it = table.instances.find(id);
    if (it == table.instances.end()) Fail(ErrorCode::kDanglingReference, id);
    for (size_t index : it->second.ratings) {
      const Rating& r = table.ratings[index];
      auto& [sum, count] = sums[r.question_id];
      sum += r.score;
      ++count;
    }
  }

  OutlierReport report;
  std::vector<double> values;
  for (const auto& id : kept) {
    std::vector<double> scores;
    std::vector<double> mos;
    for (size_t index : table.instances.at(id).ratings) {
      const Rating& r = table.ratings[index];
      if (table.questions.at(r.question_id).kind != QuestionKind::kStudy) {
        continue;
      }
      const auto& [sum, count] = sums.at(r.question_id);
      scores.push_back(r.score);
      mos.push_back(sum / count);
    }
    double cr = 0.0;
    try {
      cr = std::min(Pearson(scores, mos), Spearman(scores, mos));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput &&
          e.code() != ErrorCode::kInvalidArgument) {
        throw;
      }
      report.degenerate.insert(id);
    }
    report.cr.emplace(id, cr);
    values.push_back(cr);
  }

  report.mu = Mean(values);
  double var = 0.0;
  for (double v : values) var += (v - report.mu) * (v - report.mu);
  report.sigma = std::sqrt(var / static_cast<double>(values.size()));
  report.cutoff = std::min(report.mu - report.sigma, kOutlierCeiling);
  for (const auto& [id, cr] : report.cr) {
    (cr < report.cutoff ? report.removed : report.kept).insert(id);
  }
  return report;
}

}  // namespace idsqs
