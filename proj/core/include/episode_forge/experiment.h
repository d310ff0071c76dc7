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

#ifndef EPISODE_FORGE_EXPERIMENT_H_
#define EPISODE_FORGE_EXPERIMENT_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "episode_forge/diversity.h"
#include "episode_forge/embeddings.h"
#include "episode_forge/episodes.h"
#include "episode_forge/protonet.h"
#include "episode_forge/samplers.h"
#include "episode_forge/stats.h"

namespace episode_forge {

enum class Learner { kMaml, kMamlFo, kReptile, kProtonet };

std::string_view LearnerName(Learner learner);
// "maml", "maml-fo" (or "maml_fo"), "reptile", "protonet".
Learner ParseLearner(std::string_view name);

struct TrainConfig {
  Learner learner = Learner::kMamlFo;
  // kind and meta-batch size; its seed is replaced by `seed` below.
  SamplerConfig sampler;
  int epochs = 20;
  int batches_per_epoch = 100;
  int inner_steps = 1;
  double inner_lr = 1e-3;
  double meta_lr = 1e-3;
  int k_shot = 5;
  int q_queries = kDefaultQueries;
  int eval_pool_size = 1024;
  // Training randomness: initialisation, sampler, episodes.
  std::uint64_t seed = 0;
  // Held-out pool and its episodes; shared by every sampler and learner.
  std::uint64_t eval_seed = 0;
  int threads = 1;

  RegressionFamily family = RegressionFamily::kSinusoid;

  // Classification only.
  int ddpp_refresh_interval = 50;
  int embedding_samples = 10;
  double init_scale = 0.1;

  // Per-learner defaults for the fields above.
  static TrainConfig Defaults(Learner learner);

  void Validate() const;
};

struct CurvePoint {
  int epoch = 0;
  double mean_metric = 0.0;
};

struct RunResult {
  // MSE (regression) or accuracy (classification), one per held-out task.
  std::vector<double> per_task;
  // Mean training query metric per epoch.
  std::vector<CurvePoint> curve;
  MeanCi summary;
  // Same held-out evaluation at the initial parameters.
  double untrained_mean = 0.0;
  std::uint64_t tasks_seen = 0;
  std::vector<std::string> log;
  std::vector<double> params;
};

// Held-out regression tasks, a function of (family, size, eval_seed) only.
std::vector<RegressionTask> RegressionEvalPool(RegressionFamily family,
                                               int size,
                                               std::uint64_t eval_seed);

// Per task: adapt on a fresh support set with the config's inner loop, then
// the query MSE.
std::vector<double> EvaluateRegression(std::span<const int> sizes,
                                       std::span<const double> params,
                                       std::span<const RegressionTask> pool,
                                       const TrainConfig& config);

// Throws kNonFinite as soon as a training loss is NaN or infinite.
RunResult RunRegressionExperiment(const TrainConfig& config);

// Held-out classification tasks drawn uniformly from `test`.
std::vector<Task> ClassificationEvalPool(const ClassPool& test, int n_way,
                                         int size, std::uint64_t eval_seed);

std::vector<double> EvaluateProtonet(const ProtoModel& model,
                                     std::span<const Task> pool,
                                     const ClassPool& test,
                                     const TrainConfig& config);

// `static_table` supplies sdpp's fixed embeddings. The trained model is
// written to `trained` when non-null.
RunResult RunProtonetExperiment(
    const TrainConfig& config, const ClassPool& train, const ClassPool& test,
    std::shared_ptr<const EmbeddingTable> static_table = {},
    ProtoModel* trained = nullptr);

// Query loss of `model` on an episode of the task, drawn from a stream keyed
// by (seed, task id) so a task always scores the same.
DifficultyFn ProtonetDifficulty(std::shared_ptr<const ProtoModel> model,
                                ClassPool pool, int k_shot, int q_queries,
                                std::uint64_t seed);

// Difficulty feed for diversity measurements: a Protonet trained on `pool`
// for the default protonet budget with the uniform sampler, then frozen.
DifficultyFn BriefProtonetDifficulty(const ClassPool& pool, std::uint64_t seed,
                                     int threads = 1);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_EXPERIMENT_H_
