// Copyright 2026 The Episode Forge Authors
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

#include "episode_forge/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "episode_forge/error.h"

namespace episode_forge {
namespace {

constexpr int kMaxIterations = 1000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), modified Lentz.
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEpsilon) break;
  }
  return h;
}

void RequireFinite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::kNonFinite, "sample contains a non-finite value");
    }
  }
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double RegularizedGammaQ(double a, double x) {
  if (!(a > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "incomplete gamma needs a > 0");
  }
  if (x <= 0.0) return 1.0;
  const double log_front = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIterations; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEpsilon) break;
    }
    return 1.0 - sum * std::exp(log_front);
  }
  // Continued fraction for Q(a, x).
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEpsilon) break;
  }
  return std::exp(log_front) * h;
}

double StudentTTwoSidedP(double t, double dof) {
  if (!(dof > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t distribution needs dof > 0");
  }
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const double x = dof / (dof + t * t);
  return RegularizedIncompleteBeta(0.5 * dof, 0.5, x);
}

double StudentTCdf(double t, double dof) {
  const double tail = 0.5 * StudentTTwoSidedP(t, dof);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double StudentTQuantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "quantile needs p in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  // Bracket then bisect; the CDF is monotone so this always converges.
  double lo = -1.0;
  double hi = 1.0;
  while (StudentTCdf(lo, dof) > p) lo *= 2.0;
  while (StudentTCdf(hi, dof) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi));
       ++i) {
    const double mid = 0.5 * (lo + hi);
    if (StudentTCdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ChiSquareSurvival(double x, double dof) {
  if (!(dof > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "chi-square needs dof > 0");
  }
  return RegularizedGammaQ(0.5 * dof, 0.5 * x);
}

double Mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::kEmptyInput, "mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double SampleStdDev(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "std dev needs n >= 2");
  }
  const double m = Mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "paired samples differ in length (" + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "paired t-test needs n >= 2");
  }
  RequireFinite(a);
  RequireFinite(b);
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.dof = static_cast<int>(d.size()) - 1;
  const double mean = Mean(d);
  const double sd = SampleStdDev(d);
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.degenerate = true;
      r.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p = StudentTTwoSidedP(r.t, r.dof);
  return r;
}

MeanCi MeanCi95(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "confidence interval needs n >= 2");
  }
  RequireFinite(xs);
  const double n = static_cast<double>(xs.size());
  const double q = StudentTQuantile(0.975, n - 1.0);
  return MeanCi{Mean(xs), q * SampleStdDev(xs) / std::sqrt(n)};
}

}  // namespace episode_forge
