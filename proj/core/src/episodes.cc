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
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "episode_forge/error.h"

namespace episode_forge {

GaussianExampleSource::GaussianExampleSource(std::vector<Vector> means,
                                             double noise)
    : means_(std::move(means)), noise_(noise) {
  if (means_.empty()) {
    throw Error(ErrorCode::kEmptyInput, "example source needs classes");
  }
  if (!(noise_ >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise must be >= 0");
  }
  dim_ = means_.front().size();
  for (const Vector& m : means_) {
    if (m.size() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, "class means are ragged");
    }
  }
}

const Vector& GaussianExampleSource::mean(ClassId cls) const {
  if (cls < 0 || static_cast<std::size_t>(cls) >= means_.size()) {
    throw Error(ErrorCode::kUnknownItem,
                "unknown class " + std::to_string(cls));
  }
  return means_[static_cast<std::size_t>(cls)];
}

Vector GaussianExampleSource::Draw(ClassId cls, RandomStream& rng) const {
  Vector x = mean(cls);
  for (double& v : x) v += noise_ * rng.Normal();
  return x;
}

ClassPool::ClassPool(std::vector<ClassId> classes,
                     std::shared_ptr<const ExampleSource> source, Split split)
    : classes_(std::move(classes)), source_(std::move(source)), split_(split) {
  if (!source_) {
    throw Error(ErrorCode::kInvalidArgument, "class pool needs a source");
  }
  member_.assign(source_->num_classes(), false);
  for (ClassId c : classes_) {
    if (c < 0 || static_cast<std::size_t>(c) >= member_.size()) {
      throw Error(ErrorCode::kUnknownItem,
                  "class " + std::to_string(c) + " not in example source");
    }
    if (member_[static_cast<std::size_t>(c)]) {
      throw Error(ErrorCode::kDuplicateClass,
                  "class " + std::to_string(c) + " listed twice");
    }
    member_[static_cast<std::size_t>(c)] = true;
  }
}

bool ClassPool::Contains(ClassId cls) const {
  return cls >= 0 && static_cast<std::size_t>(cls) < member_.size() &&
         member_[static_cast<std::size_t>(cls)];
}

Vector ClassPool::DrawExample(ClassId cls, RandomStream& rng) const {
  if (!Contains(cls)) {
    throw Error(ErrorCode::kUnknownItem,
                "class " + std::to_string(cls) + " is not in this pool");
  }
  return source_->Draw(cls, rng);
}

ClassPool ClassPool::Subset(std::vector<ClassId> classes, Split split) const {
  for (ClassId c : classes) {
    if (!Contains(c)) {
      throw Error(ErrorCode::kUnknownItem,
                  "class " + std::to_string(c) + " is not in this pool");
    }
  }
  return ClassPool(std::move(classes), source_, split);
}

SyntheticWorld SynthGaussianWorld(int n_classes, int dim, double spread,
                                  double noise, std::uint64_t seed) {
  if (n_classes < 2 || dim < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "synthetic world needs >= 2 classes and dim >= 2");
  }
  if (!(spread > 0.0) || !(noise >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "spread must be > 0 and noise >= 0");
  }
  RandomStream rng = RandomStream(seed).Derive("world/means");
  std::vector<Vector> means(static_cast<std::size_t>(n_classes),
                            Vector(static_cast<std::size_t>(dim)));
  EmbeddingTable table(static_cast<std::size_t>(dim));
  std::vector<ClassId> ids;
  for (int c = 0; c < n_classes; ++c) {
    Vector& m = means[static_cast<std::size_t>(c)];
    for (double& v : m) v = spread * rng.Normal();
    ids.push_back(table.Add(std::to_string(c), m));
  }
  auto source =
      std::make_shared<GaussianExampleSource>(std::move(means), noise);
  return SyntheticWorld{ClassPool(std::move(ids), std::move(source), Split::kTrain),
                        std::move(table)};
}

TrainTestPools SplitPool(const ClassPool& pool, std::size_t n_test) {
  if (n_test == 0 || n_test >= pool.size()) {
    throw Error(ErrorCode::kPoolTooSmall,
                "cannot carve " + std::to_string(n_test) +
                    " test classes from a pool of " +
                    std::to_string(pool.size()));
  }
  const auto& all = pool.classes();
  const auto cut = static_cast<std::ptrdiff_t>(all.size() - n_test);
  return TrainTestPools{
      pool.Subset({all.begin(), all.begin() + cut}, Split::kTrain),
      pool.Subset({all.begin() + cut, all.end()}, Split::kTest)};
}

std::uint64_t TaskIdOf(std::span<const ClassId> classes) {
  std::vector<ClassId> sorted(classes.begin(), classes.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 0x7461736b5f696421ull;
  for (ClassId c : sorted) {
    h = HashCombine(h, static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)));
  }
  return h;
}

Task Task::Make(std::vector<ClassId> classes, std::vector<int> label_perm) {
  const std::size_t n = classes.size();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "task has no classes");
  if (label_perm.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "label permutation length differs from class count");
  }
  std::vector<ClassId> sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kDuplicateClass, "task classes must be distinct");
  }
  std::vector<bool> seen(n, false);
  for (int p : label_perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= n ||
        seen[static_cast<std::size_t>(p)]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label_perm is not a permutation");
    }
    seen[static_cast<std::size_t>(p)] = true;
  }
  Task t;
  t.task_id = TaskIdOf(classes);
  t.classes = std::move(classes);
  t.label_perm = std::move(label_perm);
  return t;
}

std::vector<ClassId> Task::SortedClasses() const {
  std::vector<ClassId> s = classes;
  std::sort(s.begin(), s.end());
  return s;
}

Vector Episode::OneHot(int label) const {
  Vector y(static_cast<std::size_t>(n_way), 0.0);
  y.at(static_cast<std::size_t>(label)) = 1.0;
  return y;
}

Episode DrawEpisode(const Task& task, const ClassPool& pool, int k_shot,
                    int q_queries, RandomStream& rng) {
  if (k_shot < 1 || q_queries < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_shot and q_queries must be >= 1");
  }
  for (ClassId c : task.classes) {
    if (!pool.Contains(c)) {
      throw Error(ErrorCode::kUnknownItem,
                  "task class " + std::to_string(c) + " is not in the pool");
    }
  }
  Episode ep;
  ep.n_way = task.n_way();
  ep.k_shot = k_shot;
  ep.q_queries = q_queries;
  ep.support.reserve(task.classes.size() * static_cast<std::size_t>(k_shot));
  ep.query.reserve(task.classes.size() * static_cast<std::size_t>(q_queries));
  for (std::size_t i = 0; i < task.classes.size(); ++i) {
    const int label = task.label_perm[i];
    for (int k = 0; k < k_shot; ++k) {
      ep.support.push_back({pool.DrawExample(task.classes[i], rng), label});
    }
    for (int q = 0; q < q_queries; ++q) {
      ep.query.push_back({pool.DrawExample(task.classes[i], rng), label});
    }
  }
  return ep;
}

std::string_view RegressionFamilyName(RegressionFamily family) {
  switch (family) {
    case RegressionFamily::kSinusoid: return "sinusoid";
    case RegressionFamily::kSinusoidLine: return "sinusoid-line";
    case RegressionFamily::kHarmonic: return "harmonic";
  }
  return "sinusoid";
}

RegressionFamily ParseRegressionFamily(std::string_view name) {
  if (name == "sinusoid") return RegressionFamily::kSinusoid;
  if (name == "sinusoid-line" || name == "sinusoid_line") {
    return RegressionFamily::kSinusoidLine;
  }
  if (name == "harmonic") return RegressionFamily::kHarmonic;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown regression family '" + std::string(name) + "'");
}

namespace {

std::uint64_t RegressionTaskId(const RegressionTask& t) {
  std::uint64_t h = HashCombine(static_cast<std::uint64_t>(t.family),
                                static_cast<std::uint64_t>(t.shape));
  for (double p : t.params) h = HashCombine(h, std::bit_cast<std::uint64_t>(p));
  return h;
}

RegressionTask Finish(RegressionTask t) {
  t.task_id = RegressionTaskId(t);
  return t;
}

}  // namespace

RegressionTask RegressionTask::Sinusoid(double amplitude, double phase) {
  RegressionTask t;
  t.family = RegressionFamily::kSinusoid;
  t.shape = RegressionShape::kSine;
  t.params = {amplitude, phase, 0.0, 0.0, 0.0};
  return Finish(t);
}

RegressionTask RegressionTask::Line(double slope, double intercept) {
  RegressionTask t;
  t.family = RegressionFamily::kSinusoidLine;
  t.shape = RegressionShape::kLine;
  t.params = {slope, intercept, 0.0, 0.0, 0.0};
  return Finish(t);
}

RegressionTask RegressionTask::Harmonic(double frequency, double a1,
                                        double phase1, double a2,
                                        double phase2) {
  RegressionTask t;
  t.family = RegressionFamily::kHarmonic;
  t.shape = RegressionShape::kHarmonic;
  t.params = {frequency, a1, phase1, a2, phase2};
  return Finish(t);
}

double RegressionTask::operator()(double x) const {
  switch (shape) {
    case RegressionShape::kSine:
      return params[0] * std::sin(x - params[1]);
    case RegressionShape::kLine:
      return params[0] * x + params[1];
    case RegressionShape::kHarmonic:
      return params[1] * std::sin(params[0] * x + params[2]) +
             params[3] * std::sin(2.0 * params[0] * x + params[4]);
  }
  return 0.0;
}

RegressionTask SampleRegressionTask(RegressionFamily family,
                                    RandomStream& rng) {
  constexpr double kPi = std::numbers::pi;
  switch (family) {
    case RegressionFamily::kSinusoid: {
      const double a = rng.Uniform(kAmplitudeMin, kAmplitudeMax);
      const double phase = rng.Uniform(0.0, kPi);
      return RegressionTask::Sinusoid(a, phase);
    }
    case RegressionFamily::kSinusoidLine: {
      const bool sine = rng.Uniform() < 0.5;
      const double p0 = rng.Uniform();
      const double p1 = rng.Uniform();
      RegressionTask t =
          sine ? RegressionTask::Sinusoid(
                     kAmplitudeMin + (kAmplitudeMax - kAmplitudeMin) * p0,
                     kPi * p1)
               : RegressionTask::Line(-kSlopeMax + 2.0 * kSlopeMax * p0,
                                      -kInterceptMax + 2.0 * kInterceptMax * p1);
      t.family = RegressionFamily::kSinusoidLine;
      return Finish(t);
    }
    case RegressionFamily::kHarmonic: {
      const double f = rng.Uniform(kHarmonicFreqMin, kHarmonicFreqMax);
      const double a1 = rng.Uniform(kAmplitudeMin, kAmplitudeMax);
      const double p1 = rng.Uniform(0.0, 2.0 * kPi);
      const double a2 = rng.Uniform(kAmplitudeMin, kAmplitudeMax);
      const double p2 = rng.Uniform(0.0, 2.0 * kPi);
      return RegressionTask::Harmonic(f, a1, p1, a2, p2);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown regression family");
}

RegressionEpisode DrawRegressionEpisode(const RegressionTask& task, int k_shot,
                                        int q_queries, RandomStream& rng) {
  if (k_shot < 1 || q_queries < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_shot and q_queries must be >= 1");
  }
  RegressionEpisode ep;
  ep.support.reserve(static_cast<std::size_t>(k_shot));
  ep.query.reserve(static_cast<std::size_t>(q_queries));
  for (int i = 0; i < k_shot; ++i) {
    const double x = rng.Uniform(task.x_lo, task.x_hi);
    ep.support.push_back({x, task(x)});
  }
  for (int i = 0; i < q_queries; ++i) {
    const double x = rng.Uniform(task.x_lo, task.x_hi);
    ep.query.push_back({x, task(x)});
  }
  return ep;
}

}  // namespace episode_forge
