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

// Line-delimited report records, plot-ready CSV series and one-paragraph
// text summaries for every analysis stage.

#ifndef IDSQS_REPORTS_H_
#define IDSQS_REPORTS_H_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "idsqs/alignment.h"
#include "idsqs/distfit.h"
#include "idsqs/reconstruction.h"
#include "idsqs/screening.h"
#include "idsqs/simulator.h"

namespace idsqs {

void WriteCleansingReport(const CleansingReport& report, std::ostream& out);
void WriteOutlierReport(const OutlierReport& report, std::ostream& out);
void WriteReconstruction(const ReconstructionResult& result,
                         std::ostream& out);

// {"record":"dmos",...} per stimulus and {"record":"reference_mos",...} per
// source. ReadDmos accepts the same records.
void WriteDmos(const DmosTable& table, std::ostream& out);
DmosTable ReadDmos(std::istream& in);
DmosTable LoadDmos(const std::filesystem::path& path);

void WriteBootstrap(const BootstrapCI& ci, std::ostream& out);

// CSV: source_id,codec,distortion_level,dmos,ci_lo,ci_hi,cubic_fit. One panel
// per (source, codec), each starting at level 0; cubic_fit is the panel's
// least-squares cubic in the level (blank below 4 points).
void WriteDmosSeries(const DmosTable& table, const BootstrapCI* ci,
                     std::ostream& out);

void WriteFits(const FitSummary& summary, std::ostream& out);
// CSV: question_id,source_id,codec,distortion_level,alpha,beta,method,shape,
// gof_p,gof_passed
void WriteFitScatter(const FitSummary& summary, std::ostream& out);

void WriteAlignment(const AlignmentReport& report, std::ostream& out);
// CSV: group,source_id,codec,distortion_level,dmos,mapped,jnd
void WriteAlignmentScatter(const AlignmentReport& report, std::ostream& out);

// Records {source_id, codec, distortion_level, jnd}; an optional
// "record":"jnd" discriminator is accepted.
JndTable ReadJnd(std::istream& in);
JndTable LoadJnd(const std::filesystem::path& path);
void WriteJnd(const JndTable& table, std::ostream& out);

std::string Summarize(const CleansingReport& report);
std::string Summarize(const OutlierReport& report);
std::string Summarize(const ReconstructionResult& result);
std::string Summarize(const BootstrapCI& ci);
std::string Summarize(const FitSummary& summary);
std::string Summarize(const AlignmentReport& report);
std::string Summarize(const RecoveryMetrics& metrics);

// Opens `path` for binary truncating write, runs `body`, and throws kIo on
// failure.
void WriteFile(const std::filesystem::path& path,
               const std::function<void(std::ostream&)>& body);

}  // namespace idsqs

#endif  // IDSQS_REPORTS_H_
