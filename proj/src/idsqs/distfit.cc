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

#include "idsqs/distfit.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idsqs/error.h"
#include "idsqs/numerics.h"

namespace idsqs {

namespace {

std::vector<double> Clamped(std::span<const double> samples) {
  std::vector<double> out(samples.begin(), samples.end());
  for (double& x : out) x = std::clamp(x, kBetaClamp, 1.0 - kBetaClamp);
  return out;
}

struct LogMeans {
  double log_x = 0.0;
  double log_1mx = 0.0;
};

LogMeans ComputeLogMeans(std::span<const double> xs) {
  LogMeans m;
  for (double x : xs) {
    m.log_x += std::log(x);
    m.log_1mx += std::log1p(-x);
  }
  m.log_x /= static_cast<double>(xs.size());
  m.log_1mx /= static_cast<double>(xs.size());
  return m;
}

// Per-sample log-likelihood.
double MeanLogLik(const LogMeans& m, double a, double b) {
  return (a - 1.0) * m.log_x + (b - 1.0) * m.log_1mx - LogBeta(a, b);
}

bool InRange(double v) { return v > kBetaParamMin && v < kBetaParamMax; }

}  // namespace

std::string_view FitMethodName(FitMethod method) {
  return method == FitMethod::kMle ? "MLE" : "MOMENTS";
}

std::string_view BetaShapeName(BetaShape shape) {
  switch (shape) {
    case BetaShape::kSymmetric: return "SYMMETRIC";
    case BetaShape::kUShaped: return "U_SHAPED";
    case BetaShape::kLeftSkewed: return "LEFT_SKEWED";
    case BetaShape::kRightSkewed: return "RIGHT_SKEWED";
    case BetaShape::kUniform: return "UNIFORM";
  }
  return "SYMMETRIC";
}

BetaFit BetaFromMoments(double mean, double variance) {
  if (!(mean > 0.0 && mean < 1.0) || !(variance > 0.0) ||
      !(variance < mean * (1.0 - mean))) {
    Fail(ErrorCode::kDegenerateSample,
         "moments outside the Beta family (need 0 < v < m(1-m))");
  }
  const double kappa = mean * (1.0 - mean) / variance - 1.0;
  BetaFit fit;
  fit.alpha = mean * kappa;
  fit.beta = (1.0 - mean) * kappa;
  fit.method = FitMethod::kMoments;
  return fit;
}

double BetaLogLikelihood(std::span<const double> samples, double alpha,
                         double beta) {
  const auto xs = Clamped(samples);
  return MeanLogLik(ComputeLogMeans(xs), alpha, beta) *
         static_cast<double>(xs.size());
}

BetaFit FitBetaMoments(std::span<const double> samples) {
  if (samples.size() < 3) {
    Fail(ErrorCode::kDegenerateSample, "need at least 3 samples");
  }
  const auto xs = Clamped(samples);
  const double m = Mean(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size());
  if (v <= 0.0) Fail(ErrorCode::kDegenerateSample, "zero sample variance");
  BetaFit fit = BetaFromMoments(m, v);
  fit.n = xs.size();
  fit.loglik = MeanLogLik(ComputeLogMeans(xs), fit.alpha, fit.beta) *
               static_cast<double>(xs.size());
  return fit;
}

BetaFit FitBeta(std::span<const double> samples) {
  const BetaFit moments = FitBetaMoments(samples);
  const auto xs = Clamped(samples);
  const LogMeans lm = ComputeLogMeans(xs);
  const double n = static_cast<double>(xs.size());

  double a = moments.alpha;
  double b = moments.beta;
  double ll = MeanLogLik(lm, a, b);
  bool converged = false;
  int iteration = 0;
  for (; iteration < kBetaMaxIterations; ++iteration) {
    const double psi_ab = Digamma(a + b);
    const double ga = lm.log_x - Digamma(a) + psi_ab;
    const double gb = lm.log_1mx - Digamma(b) + psi_ab;
    if (std::max(std::abs(ga) * a, std::abs(gb) * b) < 1e-12) {
      converged = true;
      break;
    }
    const double t_ab = Trigamma(a + b);
    const double haa = t_ab - Trigamma(a);
    const double hbb = t_ab - Trigamma(b);
    const double det = haa * hbb - t_ab * t_ab;
    if (!(det > 0.0)) break;
    const double da = -(hbb * ga - t_ab * gb) / det;
    const double db = -(haa * gb - t_ab * ga) / det;
    // Step in log-parameters so both stay positive.
    const double ua = std::clamp(da / a, -5.0, 5.0);
    const double ub = std::clamp(db / b, -5.0, 5.0);
    bool accepted = false;
    double step = 1.0;
    double na = a;
    double nb = b;
    double nll = ll;
    for (int halving = 0; halving < 50; ++halving, step *= 0.5) {
      na = a * std::exp(step * ua);
      nb = b * std::exp(step * ub);
      if (!InRange(na) || !InRange(nb)) continue;
      nll = MeanLogLik(lm, na, nb);
      if (nll >= ll) {
        accepted = true;
        break;
      }
    }
    if (!InRange(na) || !InRange(nb)) break;
    if (!accepted) {
      // No ascent representable in floating point: at the optimum iff the
      // scaled gradient is already negligible.
      converged = std::max(std::abs(ga) * a, std::abs(gb) * b) < 1e-8;
      break;
    }
    const double change = std::abs(std::log(na / a)) + std::abs(std::log(nb / b));
    a = na;
    b = nb;
    ll = nll;
    if (change < 1e-14) {
      converged = true;
      ++iteration;
      break;
    }
  }

  if (!converged || !InRange(a) || !InRange(b)) return moments;
  BetaFit fit;
  fit.alpha = a;
  fit.beta = b;
  fit.method = FitMethod::kMle;
  fit.loglik = ll * n;
  fit.n = xs.size();
  fit.iterations = iteration;
  return fit;
}

GofResult ChiSquareGof(std::span<const double> samples, const BetaFit& fit,
                       double significance) {
  if (samples.size() < 10) {
    Fail(ErrorCode::kTooFewSamples, "chi-square test needs >= 10 samples");
  }
  std::vector<double> edges;
  for (int k = 1; k < kGofBins; ++k) {
    edges.push_back(BetaQuantile(static_cast<double>(k) / kGofBins, fit.alpha,
                                 fit.beta));
  }
  std::vector<double> observed(kGofBins, 0.0);
  for (double x : samples) {
    const auto bin = std::upper_bound(edges.begin(), edges.end(), x) -
                     edges.begin();
    observed[static_cast<size_t>(bin)] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  const double per_bin = n / kGofBins;

  GofResult r;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (int k = 0; k < kGofBins; ++k) {
    acc_o += observed[k];
    acc_e += per_bin;
    if (acc_e >= kGofMinExpected - 1e-9) {
      r.observed.push_back(acc_o);
      r.expected.push_back(acc_e);
      acc_o = 0.0;
      acc_e = 0.0;
    }
  }
  if (acc_e > 0.0) {
    if (r.expected.empty()) {
      r.observed.push_back(acc_o);
      r.expected.push_back(acc_e);
    } else {
      r.observed.back() += acc_o;
      r.expected.back() += acc_e;
    }
  }
  r.bins_used = static_cast<int>(r.expected.size());
  r.insufficient_bins = r.bins_used < 4;
  for (size_t k = 0; k < r.expected.size(); ++k) {
    const double d = r.observed[k] - r.expected[k];
    r.statistic += d * d / r.expected[k];
  }
  r.dof = std::max(1, r.bins_used - 1 - 2);
  r.p_value = std::clamp(ChiSquareSurvival(r.statistic, r.dof), 0.0, 1.0);
  r.passed = r.p_value >= significance;
  return r;
}

BetaShape ClassifyShape(const BetaFit& fit, double tolerance) {
  const double a = fit.alpha;
  const double b = fit.beta;
  if (std::abs(a - 1.0) <= tolerance && std::abs(b - 1.0) <= tolerance) {
    return BetaShape::kUniform;
  }
  if (std::abs(a - b) <= tolerance * (a + b)) {
    return a <= 1.0 ? BetaShape::kUShaped : BetaShape::kSymmetric;
  }
  return a > b ? BetaShape::kRightSkewed : BetaShape::kLeftSkewed;
}

FitSummary FitAllQuestions(const RatingTable& table, const IdSet& kept,
                           double significance) {
  std::map<std::string, std::vector<double>> samples;
  for (const Rating& r : table.ratings) {
    if (!kept.empty() && !kept.contains(r.batch_instance_id)) continue;
    samples[r.question_id].push_back(r.score / kMaxScore);
  }
  FitSummary summary;
  for (const auto& [qid, values] : samples) {
    const Question& question = table.questions.at(qid);
    if (question.test.IsPristine()) continue;
    QuestionFit qf;
    qf.question = question;
    qf.n = values.size();
    try {
      qf.fit = FitBeta(values);
      qf.shape = ClassifyShape(*qf.fit);
      ++summary.fitted;
      qf.gof = ChiSquareGof(values, *qf.fit, significance);
      if (!qf.gof->insufficient_bins) {
        ++summary.tested;
        if (qf.gof->passed) ++summary.passed;
      }
    } catch (const Error& e) {
      qf.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    }
    summary.questions.emplace(qid, std::move(qf));
  }
  return summary;
}

}  // namespace idsqs
