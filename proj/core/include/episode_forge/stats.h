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

#ifndef EPISODE_FORGE_STATS_H_
#define EPISODE_FORGE_STATS_H_

#include <span>

namespace episode_forge {

inline constexpr double kDefaultAlpha = 0.05;

// I_x(a, b) by Lentz's continued fraction.
double RegularizedIncompleteBeta(double a, double b, double x);
// Q(a, x) = Gamma(a, x) / Gamma(a).
double RegularizedGammaQ(double a, double x);

double StudentTCdf(double t, double dof);
// P(|T| >= |t|).
double StudentTTwoSidedP(double t, double dof);
// Inverse CDF for p in (0, 1).
double StudentTQuantile(double p, double dof);

double ChiSquareSurvival(double x, double dof);

double Mean(std::span<const double> xs);
// Sample (n - 1) standard deviation.
double SampleStdDev(std::span<const double> xs);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
  // Zero-variance differences with a nonzero mean: t is +-inf and p is 0.
  bool degenerate = false;

  bool Significant(double alpha = kDefaultAlpha) const { return p < alpha; }
};

// Two-sided paired-difference t-test on d = a - b. Throws kInvalidArgument
// for unequal lengths or n < 2 and kNonFinite for non-finite values.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

struct MeanCi {
  double mean = 0.0;
  double halfwidth = 0.0;
};

// halfwidth = t_{0.975, n-1} * sd / sqrt(n). Throws for n < 2.
MeanCi MeanCi95(std::span<const double> xs);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_STATS_H_
