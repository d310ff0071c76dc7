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

#include "episode_forge/experiment.h"

#include <cmath>
#include <sstream>
#include <string>

#include "episode_forge/error.h"
#include "episode_forge/meta.h"
#include "episode_forge/mlp.h"
#include "episode_forge/parallel.h"

namespace episode_forge {
namespace {

void CheckFinite(std::span<const double> losses, int epoch, int batch) {
  for (double l : losses) {
    if (!std::isfinite(l)) {
      std::ostringstream msg;
      msg << "non-finite training loss at epoch " << epoch << ", batch "
          << batch << "; lower the learning rates";
      throw Error(ErrorCode::kNonFinite, msg.str());
    }
  }
}

SamplerConfig SeededSampler(const TrainConfig& config) {
  SamplerConfig s = config.sampler;
  s.seed = config.seed;
  return s;
}

std::string OhtmLine(std::uint64_t batch, std::size_t buffer) {
  std::ostringstream out;
  out << "ohtm: buffer reached " << buffer << " tasks after batch " << batch
      << "; hard-task mining active";
  return out.str();
}

}  // namespace

std::string_view LearnerName(Learner learner) {
  switch (learner) {
    case Learner::kMaml: return "maml";
    case Learner::kMamlFo: return "maml-fo";
    case Learner::kReptile: return "reptile";
    case Learner::kProtonet: return "protonet";
  }
  return "?";
}

Learner ParseLearner(std::string_view name) {
  if (name == "maml") return Learner::kMaml;
  if (name == "maml-fo" || name == "maml_fo") return Learner::kMamlFo;
  if (name == "reptile") return Learner::kReptile;
  if (name == "protonet") return Learner::kProtonet;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown learner '" + std::string(name) + "'");
}

TrainConfig TrainConfig::Defaults(Learner learner) {
  TrainConfig c;
  c.learner = learner;
  switch (learner) {
    case Learner::kMaml:
    case Learner::kMamlFo:
      c.inner_steps = 1;
      c.inner_lr = 1e-3;
      c.meta_lr = 1e-3;
      break;
    case Learner::kReptile:
      c.inner_steps = 5;
      c.inner_lr = 1e-2;
      c.meta_lr = 1.0;
      break;
    case Learner::kProtonet:
      c.epochs = 5;
      c.batches_per_epoch = 20;
      c.inner_steps = 0;
      c.inner_lr = 0.0;
      c.meta_lr = 1e-2;
      c.eval_pool_size = 256;
      break;
  }
  return c;
}

void TrainConfig::Validate() const {
  sampler.Validate();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  need(epochs >= 1, "epochs must be >= 1");
  need(batches_per_epoch >= 1, "batches_per_epoch must be >= 1");
  need(k_shot >= 1, "k_shot must be >= 1");
  need(q_queries >= 1, "q_queries must be >= 1");
  need(eval_pool_size >= 2, "eval_pool_size must be >= 2");
  need(std::isfinite(meta_lr) && meta_lr > 0.0, "meta_lr must be > 0");
  need(threads >= 1, "threads must be >= 1");
  if (learner != Learner::kProtonet) {
    need(inner_steps >= 1, "inner_steps must be >= 1");
    need(std::isfinite(inner_lr) && inner_lr >= 0.0, "inner_lr must be >= 0");
  } else {
    need(ddpp_refresh_interval >= 1, "ddpp_refresh_interval must be >= 1");
    need(embedding_samples >= 1, "embedding_samples must be >= 1");
    need(std::isfinite(init_scale) && init_scale >= 0.0,
         "init_scale must be >= 0");
  }
}

std::vector<RegressionTask> RegressionEvalPool(RegressionFamily family,
                                               int size,
                                               std::uint64_t eval_seed) {
  RandomStream rng = RandomStream(eval_seed).Derive("eval/tasks");
  std::vector<RegressionTask> pool;
  pool.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) pool.push_back(SampleRegressionTask(family, rng));
  return pool;
}

std::vector<double> EvaluateRegression(std::span<const int> sizes,
                                       std::span<const double> params,
                                       std::span<const RegressionTask> pool,
                                       const TrainConfig& config) {
  const RandomStream base = RandomStream(config.eval_seed).Derive("eval/episodes");
  std::vector<double> out(pool.size());
  ParallelFor(pool.size(), config.threads, [&](std::size_t i) {
    RandomStream rng = base.Derive(static_cast<std::uint64_t>(i));
    const RegressionEpisode ep =
        DrawRegressionEpisode(pool[i], config.k_shot, config.q_queries, rng);
    const auto support = ToSamples(ep.support);
    const auto query = ToSamples(ep.query);
    const auto adapted =
        MamlAdapt(sizes, params, support, config.inner_steps, config.inner_lr);
    out[i] = MseLoss(sizes, adapted, query);
  });
  return out;
}

RunResult RunRegressionExperiment(const TrainConfig& config) {
  config.Validate();
  if (config.learner == Learner::kProtonet) {
    throw Error(ErrorCode::kWrongKind, "protonet is a classification learner");
  }
  const RandomStream root(config.seed);
  Mlp net = Mlp::Regression();
  {
    RandomStream init = root.Derive("init");
    net.InitRandom(init);
  }
  const std::vector<int> sizes = net.layer_sizes();
  std::vector<double>& params = net.params();

  RunResult result;
  const auto eval_pool =
      RegressionEvalPool(config.family, config.eval_pool_size, config.eval_seed);
  result.untrained_mean = Mean(EvaluateRegression(sizes, params, eval_pool, config));

  RegressionTaskSampler sampler(SeededSampler(config),
                                RegressionDomain(config.family));
  RandomStream episode_rng = root.Derive("train/episodes");
  Adam outer(params.size(), config.meta_lr);
  MetaStepOptions opts;
  opts.inner_steps = config.inner_steps;
  opts.inner_lr = config.inner_lr;
  opts.order = config.learner == Learner::kMaml ? MetaOrder::kSecondOrder
                                                : MetaOrder::kFirstOrder;
  opts.threads = config.threads;
  bool ohtm_logged = false;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    std::size_t count = 0;
    for (int b = 0; b < config.batches_per_epoch; ++b) {
      const auto tasks = sampler.NextMetaBatch();
      std::vector<RegressionEpisode> episodes;
      episodes.reserve(tasks.size());
      for (const RegressionTask& t : tasks) {
        episodes.push_back(DrawRegressionEpisode(t, config.k_shot,
                                                 config.q_queries, episode_rng));
      }
      const std::vector<double> losses =
          config.learner == Learner::kReptile
              ? ReptileMetaStep(sizes, params, episodes, config.inner_steps,
                                config.inner_lr, config.meta_lr, config.threads)
              : MamlMetaStep(sizes, params, episodes, opts, outer);
      CheckFinite(losses, epoch, b);
      result.tasks_seen += tasks.size();
      for (std::size_t i = 0; i < losses.size(); ++i) {
        sum += losses[i];
        ++count;
        if (config.sampler.kind == SamplerKind::kOhtm) {
          sampler.ReportDifficulty(tasks[i], losses[i]);
        }
      }
      if (config.sampler.kind == SamplerKind::kOhtm && !ohtm_logged &&
          sampler.ohtm_active()) {
        result.log.push_back(
            OhtmLine(sampler.batches_emitted(), sampler.ohtm_buffer().size()));
        ohtm_logged = true;
      }
    }
    result.curve.push_back({epoch + 1, sum / static_cast<double>(count)});
  }

  result.per_task = EvaluateRegression(sizes, params, eval_pool, config);
  result.summary = MeanCi95(result.per_task);
  result.params = params;
  return result;
}

std::vector<Task> ClassificationEvalPool(const ClassPool& test, int n_way,
                                         int size, std::uint64_t eval_seed) {
  ClassificationDomain domain(test, n_way);
  RandomStream rng = RandomStream(eval_seed).Derive("eval/tasks");
  std::vector<Task> pool;
  pool.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) pool.push_back(domain.DrawUniform(rng));
  return pool;
}

std::vector<double> EvaluateProtonet(const ProtoModel& model,
                                     std::span<const Task> pool,
                                     const ClassPool& test,
                                     const TrainConfig& config) {
  const RandomStream base = RandomStream(config.eval_seed).Derive("eval/episodes");
  std::vector<double> out(pool.size());
  ParallelFor(pool.size(), config.threads, [&](std::size_t i) {
    RandomStream rng = base.Derive(static_cast<std::uint64_t>(i));
    const Episode ep =
        DrawEpisode(pool[i], test, config.k_shot, config.q_queries, rng);
    out[i] = ProtonetLoss(model, ep, /*with_grad=*/false).accuracy;
  });
  return out;
}

RunResult RunProtonetExperiment(const TrainConfig& config,
                                const ClassPool& train, const ClassPool& test,
                                std::shared_ptr<const EmbeddingTable> static_table,
                                ProtoModel* trained) {
  config.Validate();
  if (config.learner != Learner::kProtonet) {
    throw Error(ErrorCode::kWrongKind,
                "classification runs use the protonet learner");
  }
  const SamplerKind kind = config.sampler.kind;
  if (kind == SamplerKind::kSdpp && !static_table) {
    throw Error(ErrorCode::kMissingEmbedding,
                "sdpp needs class embeddings for the training pool");
  }
  const RandomStream root(config.seed);
  const std::size_t dim = train.input_dim();
  ProtoModel model = [&] {
    RandomStream init = root.Derive("init");
    return ProtoModel::Random(dim, dim, config.init_scale, init);
  }();

  RunResult result;
  const auto eval_pool = ClassificationEvalPool(
      test, config.sampler.n_way, config.eval_pool_size, config.eval_seed);
  result.untrained_mean = Mean(EvaluateProtonet(model, eval_pool, test, config));

  TaskSampler sampler(
      SeededSampler(config),
      ClassificationDomain(train, config.sampler.n_way,
                           kind == SamplerKind::kSdpp ? static_table : nullptr));
  RandomStream episode_rng = root.Derive("train/episodes");
  RandomStream refresh_rng = root.Derive("ddpp/refresh");
  Adam optimizer(model.weights().size(), config.meta_lr);
  const auto warmup = static_cast<std::uint64_t>(config.sampler.ddpp_warmup_batches);
  const auto interval = static_cast<std::uint64_t>(config.ddpp_refresh_interval);
  const auto total_batches = static_cast<std::uint64_t>(config.epochs) *
                             static_cast<std::uint64_t>(config.batches_per_epoch);
  if (kind == SamplerKind::kDdpp && warmup > 0) {
    std::ostringstream line;
    line << "ddpp: batches 0-" << std::min(warmup, total_batches) - 1
         << " are uniform-warmup";
    result.log.push_back(line.str());
  }
  bool ohtm_logged = false;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double sum = 0.0;
    std::size_t count = 0;
    for (int b = 0; b < config.batches_per_epoch; ++b) {
      const std::uint64_t index = sampler.batches_emitted();
      if (kind == SamplerKind::kDdpp && index >= warmup &&
          (index - warmup) % interval == 0) {
        sampler.RefreshEmbeddings(std::make_shared<const EmbeddingTable>(
            ClassEmbeddingsFromModel(model, train, config.embedding_samples,
                                     refresh_rng)));
        result.log.push_back("ddpp: refreshed class embeddings before batch " +
                             std::to_string(index));
      }
      const auto tasks = sampler.NextMetaBatch();
      std::vector<Episode> episodes;
      episodes.reserve(tasks.size());
      for (const Task& t : tasks) {
        episodes.push_back(DrawEpisode(t, train, config.k_shot,
                                       config.q_queries, episode_rng));
      }
      std::vector<double> accuracies;
      const auto losses = ProtonetTrainStep(model, episodes, optimizer,
                                            config.threads, &accuracies);
      CheckFinite(losses, epoch, b);
      result.tasks_seen += tasks.size();
      for (std::size_t i = 0; i < losses.size(); ++i) {
        sum += accuracies[i];
        ++count;
        if (kind == SamplerKind::kOhtm) {
          sampler.ReportDifficulty(tasks[i], losses[i]);
        }
      }
      if (kind == SamplerKind::kOhtm && !ohtm_logged && sampler.ohtm_active()) {
        result.log.push_back(
            OhtmLine(sampler.batches_emitted(), sampler.ohtm_buffer().size()));
        ohtm_logged = true;
      }
    }
    result.curve.push_back({epoch + 1, sum / static_cast<double>(count)});
  }

  result.per_task = EvaluateProtonet(model, eval_pool, test, config);
  result.summary = MeanCi95(result.per_task);
  result.params = model.weights();
  if (trained != nullptr) *trained = model;
  return result;
}

DifficultyFn ProtonetDifficulty(std::shared_ptr<const ProtoModel> model,
                                ClassPool pool, int k_shot, int q_queries,
                                std::uint64_t seed) {
  if (!model) throw Error(ErrorCode::kInvalidArgument, "model is null");
  const RandomStream base = RandomStream(seed).Derive("difficulty");
  return [model = std::move(model), pool = std::move(pool), k_shot, q_queries,
          base](const Task& task) {
    RandomStream rng = base.Derive(task.task_id);
    const Episode ep = DrawEpisode(task, pool, k_shot, q_queries, rng);
    return ProtonetLoss(*model, ep, /*with_grad=*/false).loss;
  };
}

DifficultyFn BriefProtonetDifficulty(const ClassPool& pool, std::uint64_t seed,
                                     int threads) {
  TrainConfig config = TrainConfig::Defaults(Learner::kProtonet);
  config.seed = seed;
  config.eval_seed = seed;
  config.eval_pool_size = 2;
  config.threads = threads;
  auto model = std::make_shared<ProtoModel>(1, 1);
  RunProtonetExperiment(config, pool, pool, nullptr, model.get());
  return ProtonetDifficulty(std::move(model), pool, config.k_shot,
                            config.q_queries, seed);
}

}  // namespace episode_forge
