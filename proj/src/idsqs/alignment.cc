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

#include "idsqs/alignment.h"

#include <algorithm>
#include <cmath>

#include "idsqs/error.h"

namespace idsqs {

namespace {

constexpr int kCubic = 3;

struct Points {
  std::vector<Stimulus> stimuli;
  std::vector<double> dmos;
  std::vector<double> jnd;
};

GroupAlignment FitGroup(const std::string& name, const Points& pts) {
  if (pts.stimuli.size() < kCubic + 1) {
    Fail(ErrorCode::kInsufficientOverlap,
         name + ": " + std::to_string(pts.stimuli.size()) +
             " common stimuli, need 4");
  }
  GroupAlignment g;
  g.group = name;
  g.stimuli = pts.stimuli;
  g.dmos = pts.dmos;
  g.jnd = pts.jnd;
  g.coeffs = Polyfit(pts.dmos, pts.jnd, kCubic);
  for (double d : pts.dmos) g.mapped.push_back(PolyEval(g.coeffs, d));
  const auto [lo, hi] = std::minmax_element(pts.dmos.begin(), pts.dmos.end());
  g.monotone = IsMonotoneOn(g.coeffs, *lo, *hi);
  return g;
}

void Score(GroupAlignment& g) {
  g.mapped_vs_jnd = Correlate(g.mapped, g.jnd);
  g.raw_vs_jnd = Correlate(g.dmos, g.jnd);
  g.rank_metrics_preserved =
      g.monotone &&
      std::abs(std::abs(g.mapped_vs_jnd.srocc) - std::abs(g.raw_vs_jnd.srocc)) <
          1e-12 &&
      std::abs(std::abs(g.mapped_vs_jnd.kendall_tau) -
               std::abs(g.raw_vs_jnd.kendall_tau)) < 1e-12;
}

}  // namespace

std::string_view GroupingName(Grouping grouping) {
  switch (grouping) {
    case Grouping::kPerSource: return "per-source";
    case Grouping::kPooled: return "pooled";
    case Grouping::kPooledPerSourceMapping: return "pooled-per-source-mapping";
  }
  return "pooled";
}

std::optional<Grouping> ParseGrouping(std::string_view name) {
  for (Grouping g : {Grouping::kPerSource, Grouping::kPooled,
                     Grouping::kPooledPerSourceMapping}) {
    if (GroupingName(g) == name) return g;
  }
  return std::nullopt;
}

bool IsMonotoneOn(const std::vector<double>& coeffs, double lo, double hi) {
  auto c = [&](size_t k) { return k < coeffs.size() ? coeffs[k] : 0.0; };
  auto derivative = [&](double x) {
    return c(1) + 2.0 * c(2) * x + 3.0 * c(3) * x * x;
  };
  std::vector<double> probes = {derivative(lo), derivative(hi)};
  if (c(3) != 0.0) {
    const double vertex = -c(2) / (3.0 * c(3));
    if (vertex > lo && vertex < hi) probes.push_back(derivative(vertex));
  }
  const auto [mn, mx] = std::minmax_element(probes.begin(), probes.end());
  return *mn >= 0.0 || *mx <= 0.0;
}

AlignmentReport Align(const DmosTable& dmos, const JndTable& jnd,
                      Grouping grouping) {
  std::map<std::string, Points> by_source;
  Points all;
  for (const auto& [stimulus, d] : dmos.dmos) {
    auto it = jnd.jnd.find(stimulus);
    if (it == jnd.jnd.end()) continue;
    for (Points* p : {&by_source[stimulus.source_id], &all}) {
      p->stimuli.push_back(stimulus);
      p->dmos.push_back(d);
      p->jnd.push_back(it->second);
    }
  }

  AlignmentReport report;
  report.grouping = grouping;
  switch (grouping) {
    case Grouping::kPooled: {
      GroupAlignment g = FitGroup(kPooledGroup, all);
      Score(g);
      report.groups.emplace(g.group, std::move(g));
      break;
    }
    case Grouping::kPerSource: {
      for (const auto& [source, pts] : by_source) {
        GroupAlignment g = FitGroup(source, pts);
        Score(g);
        report.groups.emplace(source, std::move(g));
      }
      break;
    }
    case Grouping::kPooledPerSourceMapping: {
      GroupAlignment pooled;
      pooled.group = kPooledGroup;
      for (const auto& [source, pts] : by_source) {
        GroupAlignment g = FitGroup(source, pts);
        Score(g);
        pooled.monotone = pooled.monotone && g.monotone;
        pooled.stimuli.insert(pooled.stimuli.end(), g.stimuli.begin(),
                              g.stimuli.end());
        pooled.dmos.insert(pooled.dmos.end(), g.dmos.begin(), g.dmos.end());
        pooled.jnd.insert(pooled.jnd.end(), g.jnd.begin(), g.jnd.end());
        pooled.mapped.insert(pooled.mapped.end(), g.mapped.begin(),
                             g.mapped.end());
        report.groups.emplace(source, std::move(g));
      }
      if (pooled.stimuli.size() < kCubic + 1) {
        Fail(ErrorCode::kInsufficientOverlap, "no stimuli in common");
      }
      pooled.mapped_vs_jnd = Correlate(pooled.mapped, pooled.jnd);
      pooled.raw_vs_jnd = Correlate(pooled.dmos, pooled.jnd);
      // Separate per-source maps do not preserve pooled ranks in general.
      pooled.rank_metrics_preserved = false;
      report.groups.emplace(pooled.group, std::move(pooled));
      break;
    }
  }
  return report;
}

}  // namespace idsqs
