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

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "episode_forge/error.h"
#include "episode_forge/rng.h"
#include "oracles.h"

namespace episode_forge {
namespace {

TEST(PairedTTest, IdenticalSamples) {
  const std::vector<double> a{1.0, 2.5, -3.0, 4.0};
  const auto r = PairedTTest(a, a);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
  EXPECT_EQ(r.dof, 3);
  EXPECT_FALSE(r.degenerate);
  EXPECT_FALSE(r.Significant());
}

TEST(PairedTTest, ConstantShiftIsDegenerate) {
  const std::vector<double> a{2, 3, 4, 5}, b{1, 2, 3, 4};
  const auto r = PairedTTest(a, b);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.p, 0.0);
  EXPECT_TRUE(std::isinf(r.t) && r.t > 0);
  EXPECT_TRUE(r.Significant());
}

TEST(PairedTTest, FrozenReferenceValues) {
  // Reference values computed independently before the build.
  const std::vector<double> a{1.2, -0.3, 0.8, 0.4, -0.1}, b(5, 0.0);
  const auto r = PairedTTest(a, b);
  EXPECT_NEAR(r.t, 1.4414999403128945, 1e-12);
  EXPECT_NEAR(r.p, 0.22289161252283138, 1e-10);
  EXPECT_EQ(r.dof, 4);
  const auto o = oracle::PairedT(a, b);
  EXPECT_NEAR(r.t, o.t, 1e-12);
  EXPECT_NEAR(r.p, o.p, 1e-10);
}

TEST(PairedTTest, MatchesTextbookFormulaOnRandomData) {
  RandomStream rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(60);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.Normal();
      b[i] = rng.Normal() + 0.3;
    }
    const auto r = PairedTTest(a, b);
    const auto o = oracle::PairedT(a, b);
    EXPECT_NEAR(r.t, o.t, 1e-10 * (1 + std::abs(o.t)));
    EXPECT_NEAR(r.p, o.p, 1e-9);
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
  }
}

TEST(PairedTTest, AntisymmetricAndShiftInvariant) {
  RandomStream rng(2);
  std::vector<double> a(20), b(20);
  for (std::size_t i = 0; i < 20; ++i) {
    a[i] = rng.Normal();
    b[i] = rng.Normal();
  }
  const auto ab = PairedTTest(a, b), ba = PairedTTest(b, a);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
  for (std::size_t i = 0; i < 20; ++i) {
    a[i] += 7.0;
    b[i] += 7.0;
  }
  const auto shifted = PairedTTest(a, b);
  EXPECT_NEAR(shifted.t, ab.t, 1e-10);
  EXPECT_NEAR(shifted.p, ab.p, 1e-10);
}

TEST(PairedTTest, Errors) {
  const std::vector<double> one{1.0}, two{1.0, 2.0}, three{1, 2, 3};
  EXPECT_THROW(PairedTTest(one, one), Error);
  EXPECT_THROW(PairedTTest(two, three), Error);
  const std::vector<double> bad{1.0, NAN};
  try {
    PairedTTest(bad, two);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(PairedTTest, SignificanceThreshold) {
  TTestResult r;
  r.p = 0.049;
  EXPECT_TRUE(r.Significant());
  EXPECT_FALSE(r.Significant(0.01));
}

TEST(MeanCi95, Examples) {
  const std::vector<double> constant(10, 3.5);
  const auto c = MeanCi95(constant);
  EXPECT_EQ(c.mean, 3.5);
  EXPECT_EQ(c.halfwidth, 0.0);
  const auto two = MeanCi95(std::vector<double>{0.0, 2.0});
  EXPECT_DOUBLE_EQ(two.mean, 1.0);
  EXPECT_NEAR(two.halfwidth, 12.706204736432095, 1e-9);
  EXPECT_THROW(MeanCi95(std::vector<double>{1.0}), Error);
}

TEST(MeanCi95, HalfwidthShrinksAsRootN) {
  RandomStream rng(3);
  auto mean_halfwidth = [&](std::size_t n) {
    double s = 0;
    for (int t = 0; t < 400; ++t) {
      std::vector<double> xs(n);
      for (double& x : xs) x = rng.Normal();
      s += MeanCi95(xs).halfwidth / 400;
    }
    return s;
  };
  const double ratio = mean_halfwidth(100) / mean_halfwidth(400);
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(Distributions, StudentTMatchesReference) {
  for (double dof : {1.0, 2.0, 3.5, 10.0, 30.0, 1000.0}) {
    boost::math::students_t ref(dof);
    for (double t : {-40.0, -5.0, -1.3, -0.2, 0.0, 0.7, 2.0, 6.0, 25.0}) {
      EXPECT_NEAR(StudentTCdf(t, dof), boost::math::cdf(ref, t), 1e-8)
          << t << " " << dof;
      EXPECT_NEAR(StudentTTwoSidedP(t, dof),
                  2 * boost::math::cdf(boost::math::complement(ref, std::abs(t))),
                  1e-8);
    }
    for (double p : {0.01, 0.3, 0.5, 0.9, 0.975}) {
      EXPECT_NEAR(StudentTQuantile(p, dof), boost::math::quantile(ref, p),
                  1e-7 * (1 + std::abs(boost::math::quantile(ref, p))));
    }
  }
  EXPECT_NEAR(StudentTQuantile(0.975, 1), 12.706204736432095, 1e-8);
}

TEST(Distributions, ChiSquareAndSpecialFunctions) {
  for (double dof : {1.0, 4.0, 9.0, 50.0}) {
    boost::math::chi_squared ref(dof);
    for (double x : {0.1, 1.0, 5.0, 20.0, 80.0}) {
      EXPECT_NEAR(ChiSquareSurvival(x, dof),
                  boost::math::cdf(boost::math::complement(ref, x)), 1e-9);
    }
  }
  EXPECT_NEAR(RegularizedIncompleteBeta(1.0, 1.0, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(RegularizedIncompleteBeta(2.0, 3.0, 0.4), 0.5248, 1e-12);
  EXPECT_NEAR(RegularizedGammaQ(1.0, 2.0), std::exp(-2.0), 1e-14);
}

TEST(Descriptive, MeanAndStdDev) {
  const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(Mean(xs), 5.0);
  EXPECT_NEAR(SampleStdDev(xs), std::sqrt(32.0 / 7.0), 1e-14);
}

}  // namespace
}  // namespace episode_forge
