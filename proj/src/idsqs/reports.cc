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

#include "idsqs/reports.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "idsqs/error.h"
#include "idsqs/numerics.h"
#include "json.hpp"

namespace idsqs {

using nlohmann::json;

namespace {

std::string Num(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string Fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void AddStimulus(json& j, const Stimulus& s) {
  j["source_id"] = s.source_id;
  j["codec"] = std::string(CodecName(s.codec));
  j["distortion_level"] = s.distortion_level;
}

Stimulus ReadStimulus(const json& j) {
  const auto name = j.at("codec").get<std::string>();
  auto codec = ParseCodec(name);
  if (!codec) throw std::invalid_argument("unknown codec " + name);
  return Stimulus{j.at("source_id").get<std::string>(), *codec,
                  j.at("distortion_level").get<int>()};
}

json Correlations(const CorrelationReport& c) {
  return {{"plcc", c.plcc},
          {"srocc", c.srocc},
          {"kendall_tau", c.kendall_tau},
          {"n", c.n}};
}

template <typename Fn>
void ForEachRecord(std::istream& in, Fn&& fn) {
  std::string text;
  size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(text));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      Fail(ErrorCode::kMalformedRecord,
           "line " + std::to_string(line) + ": " + e.what());
    }
  }
}

}  // namespace

void WriteFile(const std::filesystem::path& path,
               const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

void WriteCleansingReport(const CleansingReport& report, std::ostream& out) {
  out << json{{"record", "cleansing"},
              {"threshold", report.threshold},
              {"bins", report.bins},
              {"instances", report.accuracy.size()},
              {"kept", report.kept.size()},
              {"discarded", report.discarded.size()}}
             .dump()
      << '\n';
  for (const auto& [id, accuracy] : report.accuracy) {
    out << json{{"record", "instance_accuracy"},
                {"batch_instance_id", id},
                {"accuracy", accuracy},
                {"kept", report.kept.contains(id)}}
               .dump()
        << '\n';
  }
}

void WriteOutlierReport(const OutlierReport& report, std::ostream& out) {
  out << json{{"record", "outliers"},
              {"mu", report.mu},
              {"sigma", report.sigma},
              {"cutoff", report.cutoff},
              {"instances", report.cr.size()},
              {"kept", report.kept.size()},
              {"removed", report.removed.size()},
              {"degenerate", report.degenerate.size()},
              {"leave_one_out", report.leave_one_out}}
             .dump()
      << '\n';
  for (const auto& [id, cr] : report.cr) {
    out << json{{"record", "instance_cr"},
                {"batch_instance_id", id},
                {"cr", cr},
                {"removed", report.removed.contains(id)},
                {"degenerate", report.degenerate.contains(id)}}
               .dump()
        << '\n';
  }
}

void WriteReconstruction(const ReconstructionResult& result,
                         std::ostream& out) {
  out << json{{"record", "reconstruction"},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"final_delta", result.final_delta}}
             .dump()
      << '\n';
  for (const auto& [qid, mos] : result.mos) {
    out << json{{"record", "mos"}, {"question_id", qid}, {"mos", mos}}.dump()
        << '\n';
  }
  for (const auto& [subject, bias] : result.bias) {
    out << json{{"record", "subject"},
                {"subject_id", subject},
                {"bias", bias},
                {"consistency", result.consistency.at(subject)},
                {"residual_sd", result.residual_sd.at(subject)}}
               .dump()
        << '\n';
  }
}

void WriteDmos(const DmosTable& table, std::ostream& out) {
  for (const auto& [source, mos] : table.reference_mos) {
    out << json{{"record", "reference_mos"}, {"source_id", source}, {"mos", mos}}
               .dump()
        << '\n';
  }
  for (const auto& [stimulus, dmos] : table.dmos) {
    json j{{"record", "dmos"}, {"dmos", dmos}, {"mos", table.mos.at(stimulus)}};
    AddStimulus(j, stimulus);
    out << j.dump() << '\n';
  }
}

DmosTable ReadDmos(std::istream& in) {
  DmosTable table;
  ForEachRecord(in, [&](const json& j) {
    const auto record = j.at("record").get<std::string>();
    if (record == "reference_mos") {
      table.reference_mos[j.at("source_id").get<std::string>()] =
          j.at("mos").get<double>();
    } else if (record == "dmos") {
      const Stimulus s = ReadStimulus(j);
      table.dmos[s] = j.at("dmos").get<double>();
      table.mos[s] = j.value("mos", j.at("dmos").get<double>());
    }
  });
  return table;
}

DmosTable LoadDmos(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return ReadDmos(in);
}

void WriteBootstrap(const BootstrapCI& ci, std::ostream& out) {
  out << json{{"record", "bootstrap"},
              {"replicates", ci.replicates},
              {"level", ci.level},
              {"seed", ci.seed},
              {"nonconverged", ci.nonconverged}}
             .dump()
      << '\n';
  for (const auto& [stimulus, interval] : ci.intervals) {
    json j{{"record", "ci"},
           {"dmos", interval.point},
           {"lo", interval.lo},
           {"hi", interval.hi}};
    AddStimulus(j, stimulus);
    out << j.dump() << '\n';
  }
}

void WriteDmosSeries(const DmosTable& table, const BootstrapCI* ci,
                     std::ostream& out) {
  out << "source_id,codec,distortion_level,dmos,ci_lo,ci_hi,cubic_fit\n";
  std::map<std::pair<std::string, Codec>, std::vector<Stimulus>> panels;
  for (const auto& [stimulus, dmos] : table.dmos) {
    if (!stimulus.IsPristine()) {
      panels[{stimulus.source_id, stimulus.codec}].push_back(stimulus);
    }
  }
  for (const auto& [key, stimuli] : panels) {
    const auto& [source, codec] = key;
    std::vector<Stimulus> rows;
    const Stimulus pristine = Stimulus::Pristine(source);
    if (table.dmos.contains(pristine)) rows.push_back(pristine);
    rows.insert(rows.end(), stimuli.begin(), stimuli.end());

    std::vector<double> levels;
    std::vector<double> values;
    for (const auto& s : rows) {
      levels.push_back(s.distortion_level);
      values.push_back(table.dmos.at(s));
    }
    std::vector<double> cubic;
    if (rows.size() >= 4) {
      try {
        cubic = Polyfit(levels, values, 3);
      } catch (const Error&) {
        cubic.clear();
      }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      std::string lo;
      std::string hi;
      if (ci != nullptr) {
        auto it = ci->intervals.find(rows[i]);
        if (it != ci->intervals.end()) {
          lo = Num(it->second.lo);
          hi = Num(it->second.hi);
        }
      }
      out << source << ',' << CodecName(codec) << ','
          << rows[i].distortion_level << ',' << Num(values[i]) << ',' << lo
          << ',' << hi << ','
          << (cubic.empty() ? std::string() : Num(PolyEval(cubic, levels[i])))
          << '\n';
    }
  }
}

void WriteFits(const FitSummary& summary, std::ostream& out) {
  out << json{{"record", "fit_summary"},
              {"fitted", summary.fitted},
              {"tested", summary.tested},
              {"passed", summary.passed},
              {"pass_rate", summary.PassRate()}}
             .dump()
      << '\n';
  for (const auto& [qid, qf] : summary.questions) {
    json j{{"record", "beta_fit"}, {"question_id", qid}, {"n", qf.n}};
    AddStimulus(j, qf.question.test);
    if (qf.fit) {
      j["alpha"] = qf.fit->alpha;
      j["beta"] = qf.fit->beta;
      j["method"] = std::string(FitMethodName(qf.fit->method));
      j["loglik"] = qf.fit->loglik;
      j["shape"] = std::string(BetaShapeName(*qf.shape));
    }
    if (qf.gof) {
      j["gof"] = {{"statistic", qf.gof->statistic},
                  {"dof", qf.gof->dof},
                  {"p_value", qf.gof->p_value},
                  {"passed", qf.gof->passed},
                  {"bins_used", qf.gof->bins_used},
                  {"insufficient_bins", qf.gof->insufficient_bins}};
    }
    if (!qf.error.empty()) j["error"] = qf.error;
    out << j.dump() << '\n';
  }
}

void WriteFitScatter(const FitSummary& summary, std::ostream& out) {
  out << "question_id,source_id,codec,distortion_level,alpha,beta,method,"
         "shape,gof_p,gof_passed\n";
  for (const auto& [qid, qf] : summary.questions) {
    if (!qf.fit) continue;
    const Stimulus& s = qf.question.test;
    out << qid << ',' << s.source_id << ',' << CodecName(s.codec) << ','
        << s.distortion_level << ',' << Num(qf.fit->alpha) << ','
        << Num(qf.fit->beta) << ',' << FitMethodName(qf.fit->method) << ','
        << BetaShapeName(*qf.shape) << ','
        << (qf.gof ? Num(qf.gof->p_value) : std::string()) << ','
        << (qf.gof ? (qf.gof->passed ? "1" : "0") : "") << '\n';
  }
}

void WriteAlignment(const AlignmentReport& report, std::ostream& out) {
  for (const auto& [name, g] : report.groups) {
    out << json{{"record", "alignment"},
                {"grouping", std::string(GroupingName(report.grouping))},
                {"group", name},
                {"cubic_coeffs", g.coeffs},
                {"monotone", g.monotone},
                {"rank_metrics_preserved", g.rank_metrics_preserved},
                {"mapped", Correlations(g.mapped_vs_jnd)},
                {"raw", Correlations(g.raw_vs_jnd)}}
               .dump()
        << '\n';
  }
}

void WriteAlignmentScatter(const AlignmentReport& report, std::ostream& out) {
  out << "group,source_id,codec,distortion_level,dmos,mapped,jnd\n";
  for (const auto& [name, g] : report.groups) {
    for (size_t i = 0; i < g.stimuli.size(); ++i) {
      const Stimulus& s = g.stimuli[i];
      out << name << ',' << s.source_id << ',' << CodecName(s.codec) << ','
          << s.distortion_level << ',' << Num(g.dmos[i]) << ','
          << Num(g.mapped[i]) << ',' << Num(g.jnd[i]) << '\n';
    }
  }
}

JndTable ReadJnd(std::istream& in) {
  JndTable table;
  ForEachRecord(in, [&](const json& j) {
    if (j.contains("record") && j["record"] != "jnd") return;
    const Stimulus s = ReadStimulus(j);
    ValidateStimulus(s);
    table.jnd[s] = j.at("jnd").get<double>();
  });
  return table;
}

JndTable LoadJnd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  return ReadJnd(in);
}

void WriteJnd(const JndTable& table, std::ostream& out) {
  for (const auto& [stimulus, value] : table.jnd) {
    json j{{"record", "jnd"}, {"jnd", value}};
    AddStimulus(j, stimulus);
    out << j.dump() << '\n';
  }
}

std::string Summarize(const CleansingReport& r) {
  std::ostringstream os;
  os << "cleansing: " << r.accuracy.size() << " instances, Otsu threshold "
     << Fixed(r.threshold, 2) << " (" << r.bins << " bins), "
     << r.discarded.size() << " discarded, " << r.kept.size() << " kept";
  return os.str();
}

std::string Summarize(const OutlierReport& r) {
  std::ostringstream os;
  os << "outliers: mu(CR) " << Fixed(r.mu, 4) << ", sigma(CR) "
     << Fixed(r.sigma, 4) << ", cutoff " << Fixed(r.cutoff, 4) << ", "
     << r.removed.size() << " removed, " << r.kept.size() << " remaining";
  if (!r.degenerate.empty()) {
    os << " (" << r.degenerate.size() << " constant-score instances)";
  }
  return os.str();
}

std::string Summarize(const ReconstructionResult& r) {
  std::ostringstream os;
  os << "reconstruction: " << r.mos.size() << " questions, " << r.bias.size()
     << " subjects, " << r.iterations << " iterations, "
     << (r.converged ? "converged" : "NOT converged");
  return os.str();
}

std::string Summarize(const BootstrapCI& ci) {
  double width = 0.0;
  for (const auto& [s, i] : ci.intervals) width += i.hi - i.lo;
  std::ostringstream os;
  os << "bootstrap: " << ci.replicates << " replicates, level "
     << Fixed(ci.level, 2) << ", seed " << ci.seed << ", mean CI width "
     << Fixed(ci.intervals.empty() ? 0.0 : width / ci.intervals.size(), 3);
  if (ci.nonconverged > 0) os << ", " << ci.nonconverged << " not converged";
  return os.str();
}

std::string Summarize(const FitSummary& s) {
  std::ostringstream os;
  os << "beta fits: " << s.fitted << " fitted, " << s.tested
     << " with a valid chi-square test, " << s.passed << " passed ("
     << Fixed(100.0 * s.PassRate(), 1) << "%)";
  return os.str();
}

std::string Summarize(const AlignmentReport& r) {
  std::ostringstream os;
  os << "alignment (" << GroupingName(r.grouping) << "):";
  for (const auto& [name, g] : r.groups) {
    os << "\n  " << name << ": PLCC " << Fixed(g.mapped_vs_jnd.plcc, 3)
       << " SROCC " << Fixed(g.mapped_vs_jnd.srocc, 3) << " Kendall "
       << Fixed(g.mapped_vs_jnd.kendall_tau, 3) << " (n=" << g.mapped_vs_jnd.n
       << (g.monotone ? "" : ", non-monotone cubic") << ")";
  }
  return os.str();
}

std::string Summarize(const RecoveryMetrics& m) {
  std::ostringstream os;
  os << "recovery: RMSE " << Fixed(m.rmse, 3) << ", PLCC " << Fixed(m.plcc, 4)
     << ", bias correlation " << Fixed(m.bias_corr, 4) << " (" << m.questions
     << " questions, " << m.subjects << " subjects)";
  return os.str();
}

}  // namespace idsqs
