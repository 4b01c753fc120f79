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

// Maps DMOS onto an external JND scale with a least-squares cubic and
// reports correlation against the reference.

#ifndef IDSQS_ALIGNMENT_H_
#define IDSQS_ALIGNMENT_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idsqs/domain.h"
#include "idsqs/numerics.h"
#include "idsqs/reconstruction.h"

namespace idsqs {

struct JndTable {
  std::map<Stimulus, double> jnd;
};

enum class Grouping {
  kPerSource,  // one cubic and one correlation report per source
  kPooled,     // one cubic over all stimuli, group "All"
  // Per-source cubics; correlations pooled over every mapped stimulus
  // (group "All", no coefficients of its own).
  kPooledPerSourceMapping,
};

std::string_view GroupingName(Grouping grouping);
std::optional<Grouping> ParseGrouping(std::string_view name);

inline constexpr char kPooledGroup[] = "All";

struct GroupAlignment {
  std::string group;
  std::vector<double> coeffs;  // cubic, constant first; empty when pooled
                               // from per-source mappings
  std::vector<Stimulus> stimuli;
  std::vector<double> dmos;
  std::vector<double> jnd;
  std::vector<double> mapped;
  CorrelationReport mapped_vs_jnd;
  CorrelationReport raw_vs_jnd;  // unmapped DMOS against JND
  bool monotone = true;          // fitted cubic monotone on the DMOS range
  // True when monotone and the rank metrics agree before/after mapping.
  bool rank_metrics_preserved = true;
};

struct AlignmentReport {
  Grouping grouping = Grouping::kPooled;
  std::map<std::string, GroupAlignment> groups;
};

// Fits JND ~ cubic(DMOS) per group on the stimuli present in both tables.
// Throws kInsufficientOverlap for a group with fewer than 4 common stimuli
// and kRankDeficient from the fit.
AlignmentReport Align(const DmosTable& dmos, const JndTable& jnd,
                      Grouping grouping);

// True when the cubic's derivative keeps one sign on [lo, hi].
bool IsMonotoneOn(const std::vector<double>& coeffs, double lo, double hi);

}  // namespace idsqs

#endif  // IDSQS_ALIGNMENT_H_
