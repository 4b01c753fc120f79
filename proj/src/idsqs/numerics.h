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

// Statistical kernel shared by the analysis stages.

#ifndef IDSQS_NUMERICS_H_
#define IDSQS_NUMERICS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace idsqs {

struct CorrelationReport {
  double plcc = 0.0;
  double srocc = 0.0;
  double kendall_tau = 0.0;
  size_t n = 0;
};

// Product-moment correlation. Throws kDegenerateInput when either series is
// constant and kInvalidArgument when sizes differ or are below 2.
double Pearson(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> AverageRanks(std::span<const double> values);

double Spearman(std::span<const double> x, std::span<const double> y);

// Tie-corrected tau-b in O(n log n) (sort + merge-sort swap count).
double KendallTauB(std::span<const double> x, std::span<const double> y);

CorrelationReport Correlate(std::span<const double> x,
                            std::span<const double> y);

inline constexpr int kDefaultOtsuBins = 100;

// Otsu's threshold on a uniform histogram over [0, 1]. The result is a bin
// edge k/bins; values >= threshold form the upper class. Between-class
// variance ties resolve to the lowest edge.
double OtsuThreshold(std::span<const double> values,
                     int bins = kDefaultOtsuBins);

// Least-squares polynomial coefficients, constant term first. Solved by
// Householder QR on a centered and scaled design matrix.
std::vector<double> Polyfit(std::span<const double> x,
                            std::span<const double> y, int degree);

double PolyEval(std::span<const double> coeffs, double x);

// psi(x) for x > 0 via upward recurrence and the asymptotic series.
double Digamma(double x);
// psi'(x) for x > 0.
double Trigamma(double x);

double LogBeta(double a, double b);
// Regularized incomplete beta I_x(a, b).
double BetaCdf(double x, double a, double b);
double BetaQuantile(double p, double a, double b);
// P(X > statistic) for X ~ chi-square(dof).
double ChiSquareSurvival(double statistic, double dof);

// Type-7 (linear interpolation) empirical quantile of an unsorted sample.
double Quantile(std::vector<double> values, double p);

double Mean(std::span<const double> values);

}  // namespace idsqs

#endif  // IDSQS_NUMERICS_H_
