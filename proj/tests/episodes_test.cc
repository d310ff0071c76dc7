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

#include "episode_forge/episodes.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "episode_forge/embeddings.h"
#include "episode_forge/error.h"
#include "episode_forge/rng.h"

namespace episode_forge {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(EmbeddingsCsv, ReadsTwoOrthonormalRows) {
  std::istringstream in("class_id,e0,e1\na,1,0\nb,0,1\n");
  const auto t = ParseEmbeddingsCsv(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.at(*t.Find("a")), (Vector{1, 0}));
  EXPECT_EQ(t.at(*t.Find("b")), (Vector{0, 1}));
}

TEST(EmbeddingsCsv, Errors) {
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("");
              ParseEmbeddingsCsv(in);
            }),
            ErrorCode::kEmptyInput);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("class_id,e0,e1\na,1,0\na,0,1\n");
              ParseEmbeddingsCsv(in);
            }),
            ErrorCode::kDuplicateClass);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("class_id,e0,e1\na,1,0\nb,0\n");
              ParseEmbeddingsCsv(in);
            }),
            ErrorCode::kRaggedRow);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("class_id,e0\na,x1\n");
              ParseEmbeddingsCsv(in);
            }),
            ErrorCode::kParse);
  EXPECT_EQ(CodeOf([] {
              std::istringstream in("label,e0\na,1\n");
              ParseEmbeddingsCsv(in);
            }),
            ErrorCode::kParse);
}

TEST(EmbeddingsCsv, ErrorsCarryLineNumbers) {
  std::istringstream in("class_id,e0,e1\na,1,0\nb,0\n");
  try {
    ParseEmbeddingsCsv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
  }
}

TEST(EmbeddingsCsv, SyntheticTableRoundTripsBitExactly) {
  const auto world = SynthGaussianWorld(50, 16, 1.0, 0.1, 3);
  std::stringstream buf;
  WriteEmbeddingsCsv(world.table, buf);
  const auto back = ParseEmbeddingsCsv(buf);
  ASSERT_EQ(back.size(), 50u);
  for (ClassId id : world.table.ids()) {
    const auto other = back.Find(world.table.label(id));
    ASSERT_TRUE(other);
    EXPECT_EQ(back.at(*other), world.table.at(id));
  }
}

TEST(EmbeddingTable, MissingIdThrows) {
  EmbeddingTable t(2);
  t.Add("a", {1, 2});
  EXPECT_EQ(CodeOf([&] { t.at(4); }), ErrorCode::kMissingEmbedding);
  EXPECT_EQ(CodeOf([&] { t.Add("b", {1}); }), ErrorCode::kDimensionMismatch);
}

TEST(SynthGaussianWorld, ZeroNoiseExamplesEqualMeans) {
  const auto w = SynthGaussianWorld(5, 3, 1.0, 0.0, 1);
  RandomStream rng(2);
  for (ClassId c : w.pool.classes()) {
    EXPECT_EQ(w.pool.DrawExample(c, rng), w.table.at(c));
  }
}

TEST(SynthGaussianWorld, SameSeedSameWorld) {
  const auto a = SynthGaussianWorld(10, 4, 1.0, 0.5, 9);
  const auto b = SynthGaussianWorld(10, 4, 1.0, 0.5, 9);
  RandomStream ra(3), rb(3);
  for (ClassId c = 0; c < 10; ++c) {
    EXPECT_EQ(a.table.at(c), b.table.at(c));
    EXPECT_EQ(a.pool.DrawExample(c, ra), b.pool.DrawExample(c, rb));
  }
}

TEST(SynthGaussianWorld, ExampleMeanConvergesToClassMean) {
  const double noise = 0.3;
  const auto w = SynthGaussianWorld(3, 4, 1.0, noise, 4);
  RandomStream rng(5);
  for (ClassId c = 0; c < 3; ++c) {
    Vector mean(4, 0.0);
    for (int i = 0; i < 10000; ++i) {
      const auto x = w.pool.DrawExample(c, rng);
      for (std::size_t j = 0; j < 4; ++j) mean[j] += x[j] / 10000.0;
    }
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(mean[j], w.table.at(c)[j], 4 * noise / 100.0);
    }
  }
}

TEST(ClassPool, UnknownClassThrows) {
  const auto w = SynthGaussianWorld(5, 2, 1.0, 0.1, 1);
  const auto pools = SplitPool(w.pool, 2);
  RandomStream rng(1);
  EXPECT_EQ(CodeOf([&] { pools.train.DrawExample(4, rng); }),
            ErrorCode::kUnknownItem);
}

TEST(SplitPool, TrainAndTestAreDisjoint) {
  const auto w = SynthGaussianWorld(50, 2, 1.0, 0.1, 1);
  const auto pools = SplitPool(w.pool, 10);
  EXPECT_EQ(pools.train.size(), 40u);
  EXPECT_EQ(pools.test.size(), 10u);
  for (ClassId c : pools.test.classes()) EXPECT_FALSE(pools.train.Contains(c));
  EXPECT_EQ(pools.test.split(), Split::kTest);
}

TEST(Task, ValidatesAndHashesSortedClasses) {
  const auto a = Task::Make({3, 1, 7}, {0, 1, 2});
  const auto b = Task::Make({7, 3, 1}, {2, 0, 1});
  EXPECT_EQ(a.task_id, b.task_id);
  EXPECT_NE(a.task_id, Task::Make({3, 1, 8}, {0, 1, 2}).task_id);
  EXPECT_THROW(Task::Make({1, 1}, {0, 1}), Error);
  EXPECT_THROW(Task::Make({1, 2}, {0, 0}), Error);
  EXPECT_THROW(Task::Make({1, 2}, {0}), Error);
}

TEST(DrawEpisode, ShapeAndOneHot) {
  const auto w = SynthGaussianWorld(6, 3, 1.0, 0.1, 1);
  RandomStream rng(2);
  const auto ep = DrawEpisode(Task::Make({0, 4}, {0, 1}), w.pool, 1, 1, rng);
  EXPECT_EQ(ep.support.size(), 2u);
  EXPECT_EQ(ep.query.size(), 2u);
  for (const auto& e : ep.support) {
    const auto y = ep.OneHot(e.label);
    EXPECT_EQ(std::count(y.begin(), y.end(), 1.0), 1);
    EXPECT_EQ(std::accumulate(y.begin(), y.end(), 0.0), 1.0);
  }
}

TEST(DrawEpisode, PerSlotCountsOverRandomTasks) {
  const auto w = SynthGaussianWorld(20, 3, 1.0, 0.1, 1);
  RandomStream rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(5));
    const int k = 1 + static_cast<int>(rng.UniformIndex(5));
    const int q = 1 + static_cast<int>(rng.UniformIndex(5));
    std::vector<ClassId> classes;
    for (auto i : rng.SampleWithoutReplacement(20, static_cast<std::size_t>(n))) {
      classes.push_back(static_cast<ClassId>(i));
    }
    const auto ep =
        DrawEpisode(Task::Make(classes, rng.Permutation(n)), w.pool, k, q, rng);
    std::vector<int> sc(static_cast<std::size_t>(n), 0), qc(static_cast<std::size_t>(n), 0);
    for (const auto& e : ep.support) ++sc[static_cast<std::size_t>(e.label)];
    for (const auto& e : ep.query) ++qc[static_cast<std::size_t>(e.label)];
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(sc[static_cast<std::size_t>(i)], k);
      EXPECT_EQ(qc[static_cast<std::size_t>(i)], q);
    }
  }
}

TEST(DrawEpisode, RepeatedTaskDrawsFreshExamples) {
  const auto w = SynthGaussianWorld(4, 3, 1.0, 0.1, 1);
  RandomStream rng(4);
  const auto t = Task::Make({0, 1}, {0, 1});
  const auto a = DrawEpisode(t, w.pool, 2, 2, rng);
  const auto b = DrawEpisode(t, w.pool, 2, 2, rng);
  for (const auto& x : a.support) {
    for (const auto& y : b.support) EXPECT_NE(x.x, y.x);
  }
}

TEST(DrawEpisode, PermutationSwapsLabelsOnly) {
  const auto w = SynthGaussianWorld(4, 3, 1.0, 0.1, 1);
  RandomStream r1(5), r2(5);
  const auto a = DrawEpisode(Task::Make({0, 1}, {0, 1}), w.pool, 2, 1, r1);
  const auto b = DrawEpisode(Task::Make({0, 1}, {1, 0}), w.pool, 2, 1, r2);
  ASSERT_EQ(a.support.size(), b.support.size());
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    EXPECT_EQ(a.support[i].x, b.support[i].x);
    EXPECT_EQ(a.support[i].label, 1 - b.support[i].label);
  }
}

TEST(RegressionTask, SinusoidZeroAtPhaseAndPeak) {
  const auto t = RegressionTask::Sinusoid(2.5, 1.2);
  EXPECT_NEAR(t(1.2), 0.0, 1e-15);
  const auto u = RegressionTask::Sinusoid(1.0, 0.0);
  EXPECT_DOUBLE_EQ(u(std::numbers::pi / 2), 1.0);
}

TEST(RegressionTask, FlatLine) {
  const auto t = RegressionTask::Line(0.0, 2.0);
  for (double x : {-5.0, 0.0, 3.3}) EXPECT_EQ(t(x), 2.0);
}

TEST(RegressionTask, HarmonicMatchesTwoSineFormula) {
  const auto t = RegressionTask::Harmonic(0.8, 1.5, 0.3, 2.0, 4.0);
  for (double x : {-4.0, -0.5, 2.2}) {
    const double want = 1.5 * std::sin(0.8 * x + 0.3) + 2.0 * std::sin(1.6 * x + 4.0);
    EXPECT_NEAR(t(x), want, 1e-14);
  }
}

TEST(SampleRegressionTask, RangesHold) {
  RandomStream rng(6);
  double amin = 1e9, amax = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const auto t = SampleRegressionTask(RegressionFamily::kSinusoid, rng);
    EXPECT_EQ(t.shape, RegressionShape::kSine);
    amin = std::min(amin, t.params[0]);
    amax = std::max(amax, t.params[0]);
    EXPECT_GE(t.params[1], 0.0);
    EXPECT_LE(t.params[1], std::numbers::pi);
  }
  EXPECT_GE(amin, kAmplitudeMin);
  EXPECT_LE(amax, kAmplitudeMax);
  EXPECT_LT(amin, 0.2);
  EXPECT_GT(amax, 4.9);
}

TEST(SampleRegressionTask, SinusoidLineMixesHalfAndHalf) {
  RandomStream rng(7);
  int lines = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = SampleRegressionTask(RegressionFamily::kSinusoidLine, rng);
    if (t.shape == RegressionShape::kLine) {
      ++lines;
      EXPECT_LE(std::fabs(t.params[0]), kSlopeMax);
      EXPECT_LE(std::fabs(t.params[1]), kInterceptMax);
    }
  }
  EXPECT_NEAR(lines, 5000, 250);
}

TEST(SampleRegressionTask, HarmonicRanges) {
  RandomStream rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto t = SampleRegressionTask(RegressionFamily::kHarmonic, rng);
    EXPECT_GE(t.params[0], kHarmonicFreqMin);
    EXPECT_LE(t.params[0], kHarmonicFreqMax);
    for (int a : {1, 3}) {
      EXPECT_GE(t.params[static_cast<std::size_t>(a)], kAmplitudeMin);
      EXPECT_LE(t.params[static_cast<std::size_t>(a)], kAmplitudeMax);
    }
    for (int p : {2, 4}) {
      EXPECT_GE(t.params[static_cast<std::size_t>(p)], 0.0);
      EXPECT_LE(t.params[static_cast<std::size_t>(p)], 2 * std::numbers::pi);
    }
  }
}

TEST(DrawRegressionEpisode, NoiselessPointsInDomain) {
  RandomStream rng(9);
  const auto t = SampleRegressionTask(RegressionFamily::kSinusoid, rng);
  const auto ep = DrawRegressionEpisode(t, 5, 15, rng);
  EXPECT_EQ(ep.support.size(), 5u);
  EXPECT_EQ(ep.query.size(), 15u);
  for (const auto* set : {&ep.support, &ep.query}) {
    for (const auto& p : *set) {
      EXPECT_GE(p.x, -5.0);
      EXPECT_LE(p.x, 5.0);
      EXPECT_EQ(p.y, t(p.x));
    }
  }
}

TEST(RegressionFamily, NamesRoundTrip) {
  for (auto f : {RegressionFamily::kSinusoid, RegressionFamily::kSinusoidLine,
                 RegressionFamily::kHarmonic}) {
    EXPECT_EQ(ParseRegressionFamily(RegressionFamilyName(f)), f);
  }
  EXPECT_EQ(ParseRegressionFamily("sinusoid_line"), RegressionFamily::kSinusoidLine);
  EXPECT_THROW(ParseRegressionFamily("cubic"), Error);
}

}  // namespace
}  // namespace episode_forge
