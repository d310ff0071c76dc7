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

#include "episode_forge/diversity.h"

#include <string>
#include <utility>

#include "episode_forge/error.h"
#include "episode_forge/parallel.h"

namespace episode_forge {
namespace {

constexpr int kMaxWarmupBatches = 100000;

std::vector<Vector> ClassRows(const Task& task, const EmbeddingTable& table) {
  std::vector<Vector> rows;
  rows.reserve(task.classes.size());
  for (ClassId c : task.classes) rows.push_back(table.at(c));
  return rows;
}

BatchRecord RecordBatch(std::span<const Task> batch,
                        const EmbeddingTable& table) {
  BatchRecord rec;
  for (const Task& t : batch) {
    rec.task_diversity.push_back(TaskDiversity(t, table));
    rec.task_embeddings.push_back(TaskEmbedding(t, table));
  }
  rec.batch_diversity =
      batch.size() < 2 ? 0.0 : GramVolumeSq(rec.task_embeddings);

  double total_td = 0.0;
  for (double td : rec.task_diversity) total_td += td;
  const std::size_t dim = table.dim();
  rec.batch_embedding.assign(dim, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double pi = total_td > 0.0
                          ? rec.task_diversity[i] / total_td
                          : 1.0 / static_cast<double>(batch.size());
    for (std::size_t j = 0; j < dim; ++j) {
      rec.batch_embedding[j] += pi * rec.task_embeddings[i][j];
    }
  }
  for (double& v : rec.batch_embedding) v *= rec.batch_diversity;
  return rec;
}

SeedRecord RunSeed(const SamplerConfig& base, std::uint64_t seed,
                   const ClassPool& pool,
                   const std::shared_ptr<const EmbeddingTable>& table,
                   const DiversityProtocol& protocol,
                   const DifficultyFn& difficulty) {
  SamplerConfig cfg = base;
  cfg.seed = seed;
  cfg.meta_batch_size = protocol.batch_size;
  TaskSampler sampler(cfg, ClassificationDomain(pool, cfg.n_way, table));
  const bool ohtm = cfg.kind == SamplerKind::kOhtm;
  if (ohtm && !difficulty) {
    throw Error(ErrorCode::kInvalidArgument,
                "measuring OHTM diversity needs a difficulty feed");
  }
  auto feed = [&](const std::vector<Task>& batch) {
    for (const Task& t : batch) sampler.ReportDifficulty(t, difficulty(t));
  };
  if (protocol.warm_start) {
    for (int i = 0; i < kMaxWarmupBatches; ++i) {
      if (ohtm && !sampler.ohtm_active()) {
        feed(sampler.NextMetaBatch());
      } else if (cfg.kind == SamplerKind::kDdpp && sampler.in_ddpp_warmup()) {
        sampler.NextMetaBatch();
      } else {
        break;
      }
    }
  }

  SeedRecord rec;
  rec.seed = seed;
  std::vector<Vector> batch_embeddings;
  for (int b = 0; b < protocol.n_batches; ++b) {
    const std::vector<Task> batch = sampler.NextMetaBatch();
    if (ohtm) feed(batch);
    rec.batches.push_back(RecordBatch(batch, *table));
    batch_embeddings.push_back(rec.batches.back().batch_embedding);
  }
  rec.overall_diversity = GramVolumeSq(batch_embeddings);
  return rec;
}

}  // namespace

double TaskDiversity(const Task& task, const EmbeddingTable& table) {
  return GramVolumeSq(ClassRows(task, table));
}

Vector TaskEmbedding(const Task& task, const EmbeddingTable& table) {
  return MeanVector(ClassRows(task, table));
}

double BatchDiversity(std::span<const Task> batch,
                      const EmbeddingTable& table) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (batch.size() == 1) {
    TaskEmbedding(batch.front(), table);  // still surfaces missing classes
    return 0.0;
  }
  std::vector<Vector> rows;
  rows.reserve(batch.size());
  for (const Task& t : batch) rows.push_back(TaskEmbedding(t, table));
  return GramVolumeSq(rows);
}

Vector BatchEmbedding(std::span<const Task> batch,
                      const EmbeddingTable& table) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  return RecordBatch(batch, table).batch_embedding;
}

SamplerDiversity OverallDiversity(const SamplerConfig& base,
                                  const ClassPool& pool,
                                  std::shared_ptr<const EmbeddingTable> table,
                                  const DiversityProtocol& protocol,
                                  const DifficultyFn& difficulty,
                                  int threads) {
  if (!table) {
    throw Error(ErrorCode::kMissingEmbedding, "diversity needs embeddings");
  }
  if (protocol.n_batches < 1 || protocol.batch_size < 1 ||
      protocol.n_seeds < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "protocol counts must all be >= 1");
  }
  SamplerDiversity out;
  out.kind = base.kind;
  out.seeds.resize(static_cast<std::size_t>(protocol.n_seeds));
  ParallelFor(out.seeds.size(), threads, [&](std::size_t s) {
    out.seeds[s] = RunSeed(base, base.seed + s, pool, table, protocol,
                           difficulty);
  });
  for (const SeedRecord& s : out.seeds) out.raw += s.overall_diversity;
  out.raw /= static_cast<double>(out.seeds.size());
  return out;
}

const SamplerDiversity& DiversityReport::at(SamplerKind kind) const {
  for (const SamplerDiversity& s : samplers) {
    if (s.kind == kind) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "sampler " + std::string(SamplerKindName(kind)) +
                  " is not in the report");
}

DiversityReport MakeDiversityReport(std::span<const SamplerKind> kinds,
                                    const SamplerConfig& base,
                                    const ClassPool& pool,
                                    std::shared_ptr<const EmbeddingTable> table,
                                    const DiversityProtocol& protocol,
                                    const DifficultyFn& difficulty,
                                    int threads) {
  bool has_uniform = false;
  for (SamplerKind k : kinds) has_uniform |= k == SamplerKind::kUniform;
  if (!has_uniform) {
    throw Error(ErrorCode::kInvalidArgument,
                "the uniform sampler is required for normalisation");
  }
  DiversityReport report;
  report.protocol = protocol;
  for (SamplerKind k : kinds) {
    SamplerConfig cfg = base;
    cfg.kind = k;
    report.samplers.push_back(
        OverallDiversity(cfg, pool, table, protocol, difficulty, threads));
  }
  report.uniform_raw = report.at(SamplerKind::kUniform).raw;
  if (!(report.uniform_raw > 0.0)) {
    throw Error(ErrorCode::kZeroUniformDiversity,
                "uniform sampler has zero diversity; embeddings or protocol "
                "are degenerate");
  }
  for (SamplerDiversity& s : report.samplers) {
    s.normalized = s.raw / report.uniform_raw;
  }
  return report;
}

}  // namespace episode_forge
