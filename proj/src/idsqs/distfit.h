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

// Beta modeling of per-question score distributions.

#ifndef IDSQS_DISTFIT_H_
#define IDSQS_DISTFIT_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idsqs/domain.h"

namespace idsqs {

enum class FitMethod { kMle, kMoments };
std::string_view FitMethodName(FitMethod method);

struct BetaFit {
  double alpha = 1.0;
  double beta = 1.0;
  FitMethod method = FitMethod::kMoments;
  double loglik = 0.0;  // on the clamped sample
  size_t n = 0;
  int iterations = 0;
};

// Samples are clamped to [kBetaClamp, 1 - kBetaClamp] before fitting.
inline constexpr double kBetaClamp = 1e-4;
inline constexpr int kBetaMaxIterations = 500;
inline constexpr double kBetaParamMin = 1e-6;
inline constexpr double kBetaParamMax = 1e6;

// Closed-form moment matching: kappa = m(1-m)/v - 1, alpha = m kappa,
// beta = (1-m) kappa. Requires 0 < v < m(1-m).
BetaFit BetaFromMoments(double mean, double variance);

// Moments estimate (population variance) of the clamped sample.
BetaFit FitBetaMoments(std::span<const double> samples);

// Newton ascent on the log-likelihood starting from the moments estimate.
// Falls back to the moments fit (method = kMoments) when Newton does not
// converge within kBetaMaxIterations or leaves (1e-6, 1e6). Throws
// kDegenerateSample for n < 3 or zero variance.
BetaFit FitBeta(std::span<const double> samples);

double BetaLogLikelihood(std::span<const double> samples, double alpha,
                         double beta);

struct GofResult {
  double statistic = 0.0;
  int dof = 1;
  double p_value = 1.0;
  bool passed = true;
  int bins_used = 0;
  bool insufficient_bins = false;  // fewer than 4 bins after merging
  std::vector<double> observed;
  std::vector<double> expected;
};

inline constexpr int kGofBins = 10;
inline constexpr int kGofMinExpected = 5;

// Pearson chi-square test on equal-probability bins of the fitted Beta,
// adjacent bins merged until each expects >= 5 samples; dof subtracts the two
// estimated parameters. Throws kTooFewSamples below 10 samples.
GofResult ChiSquareGof(std::span<const double> samples, const BetaFit& fit,
                       double significance = 0.05);

enum class BetaShape { kSymmetric, kUShaped, kLeftSkewed, kRightSkewed,
                       kUniform };
std::string_view BetaShapeName(BetaShape shape);

// UNIFORM when both parameters lie within `tolerance` of 1; otherwise
// symmetric when |a - b| <= tolerance (a + b), U-shaped if also a <= 1;
// otherwise skewed, a > b labeled RIGHT_SKEWED (mass toward severe
// distortion).
BetaShape ClassifyShape(const BetaFit& fit, double tolerance = 0.05);

struct QuestionFit {
  Question question;
  size_t n = 0;
  std::optional<BetaFit> fit;
  std::optional<GofResult> gof;
  std::optional<BetaShape> shape;
  std::string error;  // e.g. "DegenerateSample: ..." when fit is absent
};

struct FitSummary {
  std::map<std::string, QuestionFit> questions;
  int fitted = 0;
  int tested = 0;  // GOF computed with >= 4 bins
  int passed = 0;
  double PassRate() const { return tested > 0 ? double(passed) / tested : 0.0; }
};

// Fits every question whose test stimulus is distorted, using ratings of
// the `kept` instances divided by 100. Per-question failures are recorded,
// not thrown.
FitSummary FitAllQuestions(const RatingTable& table, const IdSet& kept,
                           double significance = 0.05);

}  // namespace idsqs

#endif  // IDSQS_DISTFIT_H_
