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

#include "idsqs/reconstruction.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "idsqs/error.h"
#include "idsqs/numerics.h"
#include "idsqs/random.h"

namespace idsqs {

namespace {

ReconstructionResult ToNamed(const Observations& obs,
                             const std::vector<double>& mos,
                             const std::vector<bool>& rated,
                             const std::vector<double>& bias,
                             const std::vector<double>& weight,
                             const std::vector<double>& sd) {
  ReconstructionResult out;
  for (size_t q = 0; q < obs.questions.size(); ++q) {
    if (rated[q]) out.mos.emplace(obs.questions[q], mos[q]);
  }
  for (size_t i = 0; i < obs.subjects.size(); ++i) {
    out.bias.emplace(obs.subjects[i], bias[i]);
    out.consistency.emplace(obs.subjects[i], weight[i]);
    out.residual_sd.emplace(obs.subjects[i], sd[i]);
  }
  return out;
}

}  // namespace

Observations Observations::FromTable(const RatingTable& table) {
  Observations obs;
  std::map<std::string, size_t> subject_index;
  std::map<std::string, size_t> question_index;
  for (const auto& id : table.SubjectIds()) {
    subject_index.emplace(id, obs.subjects.size());
    obs.subjects.push_back(id);
  }
  for (const Rating& r : table.ratings) question_index.emplace(r.question_id, 0);
  for (auto& [id, index] : question_index) {
    index = obs.questions.size();
    obs.questions.push_back(id);
  }
  obs.entries.reserve(table.ratings.size());
  for (const Rating& r : table.ratings) {
    obs.entries.push_back({subject_index.at(r.subject_id),
                           question_index.at(r.question_id), r.score});
  }
  return obs;
}

ReconstructionResult Reconstruct(const RatingTable& table,
                                 const ReconstructionOptions& options) {
  return Reconstruct(Observations::FromTable(table), options);
}

ReconstructionResult Reconstruct(const Observations& obs,
                                 const ReconstructionOptions& options) {
  if (obs.entries.empty()) Fail(ErrorCode::kNoRatings, "no ratings");
  if (options.max_iter < 1) {
    Fail(ErrorCode::kInvalidArgument, "max_iter must be >= 1");
  }
  const size_t num_q = obs.questions.size();
  const size_t num_s = obs.subjects.size();

  std::vector<double> mos(num_q, 0.0);
  std::vector<double> count_q(num_q, 0.0);
  std::vector<double> count_s(num_s, 0.0);
  for (const auto& e : obs.entries) {
    mos[e.question] += e.score;
    count_q[e.question] += 1.0;
    count_s[e.subject] += 1.0;
  }
  std::vector<bool> rated(num_q);
  for (size_t q = 0; q < num_q; ++q) {
    rated[q] = count_q[q] > 0.0;
    if (rated[q]) mos[q] /= count_q[q];
  }

  std::vector<double> bias(num_s);
  std::vector<double> sd(num_s);
  std::vector<double> weight(num_s);
  std::vector<double> next(num_q);
  std::vector<double> wsum(num_q);
  int iteration = 0;
  bool converged = false;
  double delta = 0.0;
  while (iteration < options.max_iter) {
    ++iteration;
    std::fill(bias.begin(), bias.end(), 0.0);
    for (const auto& e : obs.entries) bias[e.subject] += e.score - mos[e.question];
    for (size_t i = 0; i < num_s; ++i) {
      if (count_s[i] > 0.0) bias[i] /= count_s[i];
    }
    std::fill(sd.begin(), sd.end(), 0.0);
    for (const auto& e : obs.entries) {
      const double residual = e.score - mos[e.question] - bias[e.subject];
      sd[e.subject] += residual * residual;
    }
    for (size_t i = 0; i < num_s; ++i) {
      const double var = count_s[i] > 0.0 ? sd[i] / count_s[i] : 0.0;
      sd[i] = std::sqrt(var);
      weight[i] = 1.0 / std::max(var, options.variance_floor);
    }
    std::fill(next.begin(), next.end(), 0.0);
    std::fill(wsum.begin(), wsum.end(), 0.0);
    for (const auto& e : obs.entries) {
      next[e.question] += weight[e.subject] * (e.score - bias[e.subject]);
      wsum[e.question] += weight[e.subject];
    }
    delta = 0.0;
    for (size_t q = 0; q < num_q; ++q) {
      if (!rated[q]) continue;
      next[q] /= wsum[q];
      delta += (next[q] - mos[q]) * (next[q] - mos[q]);
    }
    mos.swap(next);
    if (delta < options.epsilon) {
      converged = true;
      break;
    }
  }

  ReconstructionResult out = ToNamed(obs, mos, rated, bias, weight, sd);
  out.iterations = iteration;
  out.converged = converged;
  out.final_delta = delta;
  return out;
}

DmosTable ComputeDmos(const ReconstructionResult& result,
                      const std::map<std::string, Question>& questions) {
  std::map<Stimulus, std::pair<double, int>> sums;
  for (const auto& [qid, value] : result.mos) {
    auto it = questions.find(qid);
    if (it == questions.end()) Fail(ErrorCode::kDanglingReference, qid);
    auto& [sum, count] = sums[it->second.test];
    sum += value;
    ++count;
  }
  DmosTable table;
  for (const auto& [stimulus, acc] : sums) {
    const double mean = acc.first / acc.second;
    table.mos.emplace(stimulus, mean);
    if (stimulus.IsPristine()) {
      table.reference_mos.emplace(stimulus.source_id, mean);
    }
  }
  for (const auto& [stimulus, mean] : table.mos) {
    if (stimulus.IsPristine()) {
      table.dmos.emplace(stimulus, 0.0);
      continue;
    }
    auto ref = table.reference_mos.find(stimulus.source_id);
    if (ref == table.reference_mos.end()) {
      Fail(ErrorCode::kMissingReferenceMos, stimulus.source_id);
    }
    table.dmos.emplace(stimulus, mean - ref->second);
  }
  return table;
}

BootstrapCI BootstrapDmos(const RatingTable& table,
                          const BootstrapOptions& options) {
  if (options.replicates < 1) {
    Fail(ErrorCode::kInvalidArgument, "replicates must be >= 1");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "level must be in (0, 1)");
  }
  const Observations obs = Observations::FromTable(table);
  const ReconstructionResult full = Reconstruct(obs, options.reconstruction);
  const DmosTable point = ComputeDmos(full, table.questions);

  std::vector<std::vector<size_t>> by_question(obs.questions.size());
  for (size_t k = 0; k < obs.entries.size(); ++k) {
    by_question[obs.entries[k].question].push_back(k);
  }

  const auto replicates = static_cast<size_t>(options.replicates);
  std::vector<DmosTable> results(replicates);
  std::vector<char> converged(replicates, 1);
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    Observations sample;
    sample.subjects = obs.subjects;
    sample.questions = obs.questions;
    sample.entries.reserve(obs.entries.size());
    for (size_t r = next++; r < replicates; r = next++) {
      try {
        auto rng = DerivedEngine(options.seed, r);
        sample.entries.clear();
        for (const auto& members : by_question) {
          for (size_t k = 0; k < members.size(); ++k) {
            sample.entries.push_back(
                obs.entries[members[UniformIndex(rng, members.size())]]);
          }
        }
        const auto result = Reconstruct(sample, options.reconstruction);
        converged[r] = result.converged ? 1 : 0;
        results[r] = ComputeDmos(result, table.questions);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads != 0
                         ? options.threads
                         : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, options.replicates);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BootstrapCI ci;
  ci.replicates = options.replicates;
  ci.level = options.level;
  ci.seed = options.seed;
  ci.nonconverged = static_cast<int>(
      std::count(converged.begin(), converged.end(), 0));
  const double lo_p = (1.0 - options.level) / 2.0;
  const double hi_p = (1.0 + options.level) / 2.0;
  for (const auto& [stimulus, value] : point.dmos) {
    std::vector<double> values;
    values.reserve(replicates);
    for (const auto& result : results) values.push_back(result.dmos.at(stimulus));
    ci.intervals.emplace(stimulus, ConfidenceInterval{value, Quantile(values, lo_p),
                                                      Quantile(values, hi_p)});
    ci.replicate_dmos.emplace(stimulus, std::move(values));
  }
  return ci;
}

}  // namespace idsqs
