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

#ifndef EPISODE_FORGE_DIVERSITY_H_
#define EPISODE_FORGE_DIVERSITY_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "episode_forge/embeddings.h"
#include "episode_forge/episodes.h"
#include "episode_forge/geometry.h"
#include "episode_forge/samplers.h"

namespace episode_forge {

// Squared volume spanned by the task's class embeddings. Label
// permutations play no role here or anywhere below.
double TaskDiversity(const Task& task, const EmbeddingTable& table);

// Mean of the task's class embeddings.
Vector TaskEmbedding(const Task& task, const EmbeddingTable& table);

// Squared volume spanned by the task embeddings of a meta-batch. A batch of
// one task has diversity 0.
double BatchDiversity(std::span<const Task> batch, const EmbeddingTable& table);

// BD * sum_i pi_i * TE_i with pi_i = TD_i / sum_j TD_j (uniform when every
// TD is 0).
Vector BatchEmbedding(std::span<const Task> batch, const EmbeddingTable& table);

struct DiversityProtocol {
  int n_batches = 5;
  int batch_size = 8;
  int n_seeds = 3;
  // Advance OHTM past its buffer fill and ddpp past its warmup before the
  // measured batches, so both are measured in their trained regime.
  bool warm_start = true;
};

// Difficulty feed for OHTM (higher = harder).
using DifficultyFn = std::function<double(const Task&)>;

struct BatchRecord {
  std::vector<double> task_diversity;
  std::vector<Vector> task_embeddings;
  double batch_diversity = 0.0;
  Vector batch_embedding;
};

struct SeedRecord {
  std::uint64_t seed = 0;
  std::vector<BatchRecord> batches;
  double overall_diversity = 0.0;
};

struct SamplerDiversity {
  SamplerKind kind = SamplerKind::kUniform;
  // Mean over seeds of the squared volume spanned by the batch embeddings.
  double raw = 0.0;
  double normalized = 0.0;
  std::vector<SeedRecord> seeds;
};

// Runs `base` (kind, n_way, seed; meta_batch_size is replaced by the
// protocol's batch size) for each protocol seed. Seed s uses base.seed + s.
// OHTM requires `difficulty`.
SamplerDiversity OverallDiversity(const SamplerConfig& base,
                                  const ClassPool& pool,
                                  std::shared_ptr<const EmbeddingTable> table,
                                  const DiversityProtocol& protocol,
                                  const DifficultyFn& difficulty = {},
                                  int threads = 1);

struct DiversityReport {
  DiversityProtocol protocol;
  double uniform_raw = 0.0;
  std::vector<SamplerDiversity> samplers;

  // Throws kInvalidArgument for kinds absent from the report.
  const SamplerDiversity& at(SamplerKind kind) const;
};

// Every kind normalised by the uniform sampler's raw diversity. Throws
// kInvalidArgument when uniform is missing and kZeroUniformDiversity when
// its raw value is 0.
DiversityReport MakeDiversityReport(std::span<const SamplerKind> kinds,
                                    const SamplerConfig& base,
                                    const ClassPool& pool,
                                    std::shared_ptr<const EmbeddingTable> table,
                                    const DiversityProtocol& protocol,
                                    const DifficultyFn& difficulty = {},
                                    int threads = 1);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_DIVERSITY_H_
