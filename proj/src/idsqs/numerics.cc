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

#include "idsqs/numerics.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "idsqs/error.h"

namespace idsqs {

namespace {

void CheckPaired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "series lengths differ: " + std::to_string(x.size()) + " vs " +
             std::to_string(y.size()));
  }
  if (x.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "need at least two paired values");
  }
}

// Counts pairs i < j with v[i] > v[j] while sorting v ascending.
int64_t MergeCountInversions(std::vector<double>& v, std::vector<double>& buf,
                             size_t lo, size_t hi) {
  if (hi - lo < 2) return 0;
  const size_t mid = lo + (hi - lo) / 2;
  int64_t count = MergeCountInversions(v, buf, lo, mid) +
                  MergeCountInversions(v, buf, mid, hi);
  size_t i = lo;
  size_t j = mid;
  size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += static_cast<int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return count;
}

// Sum over runs of equal adjacent elements of t(t-1)/2.
template <typename It, typename Eq>
int64_t TiedPairs(It begin, It end, Eq eq) {
  int64_t total = 0;
  for (It run = begin; run != end;) {
    It next = run + 1;
    while (next != end && eq(*run, *next)) ++next;
    const auto t = static_cast<int64_t>(next - run);
    total += t * (t - 1) / 2;
    run = next;
  }
  return total;
}

}  // namespace

double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    Fail(ErrorCode::kDegenerateInput, "constant series in correlation");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const auto rx = AverageRanks(x);
  const auto ry = AverageRanks(y);
  return Pearson(rx, ry);
}

double KendallTauB(std::span<const double> x, std::span<const double> y) {
  CheckPaired(x, y);
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const int64_t x_ties = TiedPairs(
      order.begin(), order.end(),
      [&](size_t a, size_t b) { return x[a] == x[b]; });
  const int64_t joint_ties = TiedPairs(
      order.begin(), order.end(),
      [&](size_t a, size_t b) { return x[a] == x[b] && y[a] == y[b]; });

  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::vector<double> buf(n);
  const int64_t discordant = MergeCountInversions(ys, buf, 0, n);
  const int64_t y_ties = TiedPairs(ys.begin(), ys.end(),
                                   [](double a, double b) { return a == b; });

  const auto pairs = static_cast<int64_t>(n) * static_cast<int64_t>(n - 1) / 2;
  if (pairs == x_ties || pairs == y_ties) {
    Fail(ErrorCode::kDegenerateInput, "all pairs tied in one series");
  }
  const int64_t s = pairs - x_ties - y_ties + joint_ties - 2 * discordant;
  const double denom = std::sqrt(static_cast<double>(pairs - x_ties) *
                                 static_cast<double>(pairs - y_ties));
  return std::clamp(static_cast<double>(s) / denom, -1.0, 1.0);
}

CorrelationReport Correlate(std::span<const double> x,
                            std::span<const double> y) {
  CorrelationReport r;
  r.plcc = Pearson(x, y);
  r.srocc = Spearman(x, y);
  r.kendall_tau = KendallTauB(x, y);
  r.n = x.size();
  return r;
}

double OtsuThreshold(std::span<const double> values, int bins) {
  if (bins < 2) Fail(ErrorCode::kInvalidArgument, "Otsu needs >= 2 bins");
  if (values.size() < 2) {
    Fail(ErrorCode::kDegenerateInput, "Otsu needs at least two values");
  }
  std::vector<double> hist(static_cast<size_t>(bins), 0.0);
  const double nbins = bins;
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      Fail(ErrorCode::kDomainError, "Otsu input outside [0, 1]");
    }
    // Bin k holds [k/bins, (k+1)/bins); the edge test must agree with the
    // `value >= k/bins` comparison callers apply to the threshold.
    int k = std::min(bins - 1, static_cast<int>(v * nbins));
    if (k + 1 < bins && v >= (k + 1) / nbins) ++k;
    if (k > 0 && v < k / nbins) --k;
    hist[static_cast<size_t>(k)] += 1.0;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    Fail(ErrorCode::kDegenerateInput, "Otsu input is constant");
  }

  const double total = static_cast<double>(values.size());
  double total_moment = 0.0;
  for (int k = 0; k < bins; ++k) total_moment += (k + 0.5) * hist[k];

  double best = -1.0;
  int best_edge = -1;
  double w0 = 0.0;
  double m0 = 0.0;
  for (int edge = 1; edge < bins; ++edge) {
    w0 += hist[edge - 1];
    m0 += (edge - 0.5) * hist[edge - 1];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = m0 / w0;
    const double mu1 = (total_moment - m0) / w1;
    const double between = (w0 / total) * (w1 / total) * (mu0 - mu1) *
                           (mu0 - mu1);
    if (between > best) {
      best = between;
      best_edge = edge;
    }
  }
  if (best_edge < 0) {
    Fail(ErrorCode::kDegenerateInput, "all values fall in one histogram bin");
  }
  return best_edge / nbins;
}

std::vector<double> Polyfit(std::span<const double> x,
                            std::span<const double> y, int degree) {
  if (x.size() != y.size() || degree < 0) {
    Fail(ErrorCode::kInvalidArgument, "polyfit: bad arguments");
  }
  const size_t n = x.size();
  const size_t m = static_cast<size_t>(degree) + 1;
  if (n < m) {
    Fail(ErrorCode::kRankDeficient, "polyfit: fewer points than coefficients");
  }
  const double center = Mean(x);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v - center));
  if (scale == 0.0) {
    if (degree == 0) return {Mean(y)};
    Fail(ErrorCode::kRankDeficient, "polyfit: all x equal");
  }

  // Column-major design matrix in the scaled variable t = (x - c) / s.
  std::vector<double> a(n * m);
  std::vector<double> b(y.begin(), y.end());
  for (size_t i = 0; i < n; ++i) {
    const double t = (x[i] - center) / scale;
    double p = 1.0;
    for (size_t k = 0; k < m; ++k) {
      a[k * n + i] = p;
      p *= t;
    }
  }
  auto at = [&](size_t row, size_t col) -> double& { return a[col * n + row]; };

  std::vector<double> diag(m);
  for (size_t k = 0; k < m; ++k) {
    double norm = 0.0;
    for (size_t i = k; i < n; ++i) norm += at(i, k) * at(i, k);
    norm = std::sqrt(norm);
    const double alpha = at(k, k) > 0 ? -norm : norm;
    diag[k] = alpha;
    if (norm == 0.0) continue;
    // v = column - alpha * e_k, stored in place.
    at(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (size_t i = k; i < n; ++i) vnorm2 += at(i, k) * at(i, k);
    if (vnorm2 == 0.0) continue;
    for (size_t j = k + 1; j < m; ++j) {
      double dot = 0.0;
      for (size_t i = k; i < n; ++i) dot += at(i, k) * at(i, j);
      const double f = 2.0 * dot / vnorm2;
      for (size_t i = k; i < n; ++i) at(i, j) -= f * at(i, k);
    }
    double dot = 0.0;
    for (size_t i = k; i < n; ++i) dot += at(i, k) * b[i];
    const double f = 2.0 * dot / vnorm2;
    for (size_t i = k; i < n; ++i) b[i] -= f * at(i, k);
  }

  double max_diag = 0.0;
  for (double d : diag) max_diag = std::max(max_diag, std::abs(d));
  for (double d : diag) {
    if (std::abs(d) <= 1e-10 * max_diag || max_diag == 0.0) {
      Fail(ErrorCode::kRankDeficient, "polyfit: design matrix rank deficient");
    }
  }

  std::vector<double> scaled(m);
  for (size_t k = m; k-- > 0;) {
    double sum = b[k];
    for (size_t j = k + 1; j < m; ++j) sum -= at(k, j) * scaled[j];
    scaled[k] = sum / diag[k];
  }

  // Expand sum_k c_k ((x - c)/s)^k into powers of x.
  std::vector<double> coeffs(m, 0.0);
  for (size_t k = 0; k < m; ++k) {
    const double ck = scaled[k] / std::pow(scale, static_cast<double>(k));
    double binom = 1.0;
    for (size_t j = 0; j <= k; ++j) {
      coeffs[j] += ck * binom * std::pow(-center, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return coeffs;
}

double PolyEval(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

double Digamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    Fail(ErrorCode::kDomainError, "digamma requires a finite x > 0");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli tail: -sum B_2k / (2k x^2k), k = 1..7.
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 / 12))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double Trigamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    Fail(ErrorCode::kDomainError, "trigamma requires a finite x > 0");
  }
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1), k = 1..7.
  const double series =
      inv * inv2 *
      (1.0 / 6 -
       inv2 * (1.0 / 30 -
               inv2 * (1.0 / 42 -
                       inv2 * (1.0 / 30 -
                               inv2 * (5.0 / 66 -
                                       inv2 * (691.0 / 2730 -
                                               inv2 * 7.0 / 6))))));
  return acc + inv + 0.5 * inv2 + series;
}

double LogBeta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double BetaCdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(a, b, x);
}

double BetaQuantile(double p, double a, double b) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  if (a == b && p == 0.5) return 0.5;
  try {
    return boost::math::ibeta_inv(a, b, p);
  } catch (const boost::math::evaluation_error&) {
    // Newton inside ibeta_inv can stall; the CDF is monotone, so bisect.
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
      const double mid = 0.5 * (lo + hi);
      (boost::math::ibeta(a, b, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
}

double ChiSquareSurvival(double statistic, double dof) {
  if (dof <= 0.0) Fail(ErrorCode::kDomainError, "chi-square dof must be > 0");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "empty quantile input");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) *
                   std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace idsqs
