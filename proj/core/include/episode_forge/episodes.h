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

#ifndef EPISODE_FORGE_EPISODES_H_
#define EPISODE_FORGE_EPISODES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "episode_forge/embeddings.h"
#include "episode_forge/geometry.h"
#include "episode_forge/rng.h"

namespace episode_forge {

enum class Split { kTrain, kValidation, kTest };

// Per-class stochastic generator of feature-space examples x in R^D.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual Vector Draw(ClassId cls, RandomStream& rng) const = 0;
};

// Examples are class means plus isotropic Gaussian noise.
class GaussianExampleSource : public ExampleSource {
 public:
  GaussianExampleSource(std::vector<Vector> means, double noise);

  std::size_t input_dim() const override { return dim_; }
  std::size_t num_classes() const override { return means_.size(); }
  Vector Draw(ClassId cls, RandomStream& rng) const override;

  const Vector& mean(ClassId cls) const;
  double noise() const { return noise_; }

 private:
  std::vector<Vector> means_;
  double noise_;
  std::size_t dim_;
};

// Label universe for one split; immutable after construction.
class ClassPool {
 public:
  ClassPool(std::vector<ClassId> classes,
            std::shared_ptr<const ExampleSource> source, Split split);

  const std::vector<ClassId>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  Split split() const { return split_; }
  std::size_t input_dim() const { return source_->input_dim(); }
  bool Contains(ClassId cls) const;

  // Throws kUnknownItem if `cls` is not part of this pool.
  Vector DrawExample(ClassId cls, RandomStream& rng) const;

  // Same generator restricted to `classes` (each must belong to this pool).
  ClassPool Subset(std::vector<ClassId> classes, Split split) const;

 private:
  std::vector<ClassId> classes_;
  std::vector<bool> member_;
  std::shared_ptr<const ExampleSource> source_;
  Split split_;
};

struct SyntheticWorld {
  ClassPool pool;
  // Entries are the class means.
  EmbeddingTable table;
};

// Class means ~ N(0, spread^2 I); examples ~ N(mean, noise^2 I).
SyntheticWorld SynthGaussianWorld(int n_classes, int dim, double spread,
                                  double noise, std::uint64_t seed);

struct TrainTestPools {
  ClassPool train;
  ClassPool test;
};

// The last `n_test` classes of the pool become the test split.
TrainTestPools SplitPool(const ClassPool& pool, std::size_t n_test);

// N distinct classes plus the slot permutation used when labelling them.
struct Task {
  std::vector<ClassId> classes;
  // label_perm[i] is the episode label given to classes[i].
  std::vector<int> label_perm;
  // Hash of the sorted class set; independent of order and permutation.
  std::uint64_t task_id = 0;

  // Validates distinctness and the permutation; computes task_id.
  static Task Make(std::vector<ClassId> classes, std::vector<int> label_perm);

  int n_way() const { return static_cast<int>(classes.size()); }
  std::vector<ClassId> SortedClasses() const;
};

std::uint64_t TaskIdOf(std::span<const ClassId> classes);

struct LabeledExample {
  Vector x;
  int label = 0;
};

struct Episode {
  std::vector<LabeledExample> support;
  std::vector<LabeledExample> query;
  int n_way = 0;
  int k_shot = 0;
  int q_queries = 0;

  Vector OneHot(int label) const;
};

// Fresh examples on every call. Classes are visited in task order, support
// draws before query draws, so two tasks that differ only in label_perm
// produce the same inputs at the same rng position.
Episode DrawEpisode(const Task& task, const ClassPool& pool, int k_shot,
                    int q_queries, RandomStream& rng);

enum class RegressionFamily { kSinusoid, kSinusoidLine, kHarmonic };
enum class RegressionShape { kSine, kLine, kHarmonic };

std::string_view RegressionFamilyName(RegressionFamily family);
// Accepts "sinusoid", "sinusoid-line"/"sinusoid_line", "harmonic".
RegressionFamily ParseRegressionFamily(std::string_view name);

struct RegressionTask {
  RegressionFamily family = RegressionFamily::kSinusoid;
  RegressionShape shape = RegressionShape::kSine;
  // sine: {amplitude, phase}; line: {slope, intercept};
  // harmonic: {frequency, a1, phase1, a2, phase2}.
  std::array<double, 5> params{};
  double x_lo = -5.0;
  double x_hi = 5.0;
  std::uint64_t task_id = 0;

  static RegressionTask Sinusoid(double amplitude, double phase);
  static RegressionTask Line(double slope, double intercept);
  static RegressionTask Harmonic(double frequency, double a1, double phase1,
                                 double a2, double phase2);

  double operator()(double x) const;
};

struct RegressionPoint {
  double x = 0.0;
  double y = 0.0;
};

struct RegressionEpisode {
  std::vector<RegressionPoint> support;
  std::vector<RegressionPoint> query;
};

inline constexpr double kAmplitudeMin = 0.1;
inline constexpr double kAmplitudeMax = 5.0;
inline constexpr double kSlopeMax = 3.0;
inline constexpr double kInterceptMax = 3.0;
inline constexpr double kHarmonicFreqMin = 0.5;
inline constexpr double kHarmonicFreqMax = 1.5;
inline constexpr int kDefaultQueries = 15;

RegressionTask SampleRegressionTask(RegressionFamily family,
                                    RandomStream& rng);

// x ~ U(domain), y = f(x) without noise.
RegressionEpisode DrawRegressionEpisode(const RegressionTask& task, int k_shot,
                                        int q_queries, RandomStream& rng);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_EPISODES_H_
