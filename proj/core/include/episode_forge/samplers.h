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

#ifndef EPISODE_FORGE_SAMPLERS_H_
#define EPISODE_FORGE_SAMPLERS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "episode_forge/dpp.h"
#include "episode_forge/embeddings.h"
#include "episode_forge/episodes.h"
#include "episode_forge/error.h"
#include "episode_forge/rng.h"

namespace episode_forge {

enum class SamplerKind {
  kUniform,
  kNdt,
  kNdb,
  kNdtb,
  kSbu,
  kSbuBounded,
  kSbuUnbounded,
  kOhtm,
  kSdpp,
  kDdpp,
};

std::string_view SamplerKindName(SamplerKind kind);
// Accepts the names above with '_' or '-' separators.
SamplerKind ParseSamplerKind(std::string_view name);
const std::vector<SamplerKind>& AllSamplerKinds();
bool IsSingleBatchKind(SamplerKind kind);
bool IsDppKind(SamplerKind kind);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kUniform;
  int n_way = 5;
  int meta_batch_size = 32;
  int ohtm_buffer_min = 50;
  double ohtm_hard_fraction = 0.5;
  int ddpp_warmup_batches = 500;
  // Frozen task pool for sbu_bounded.
  int bounded_pool_size = 32;
  std::uint64_t seed = 0;

  // 1 for the single-batch kinds, meta_batch_size otherwise.
  int EffectiveMetaBatchSize() const;
  // Throws kInvalidArgument on out-of-range fields.
  void Validate() const;
};

// Classification tasks: N distinct classes of a pool with a slot permutation.
class ClassificationDomain {
 public:
  using TaskType = Task;

  // Throws kPoolTooSmall when the pool has fewer than n_way classes.
  ClassificationDomain(ClassPool pool, int n_way,
                       std::shared_ptr<const EmbeddingTable> embeddings = {});

  Task DrawUniform(RandomStream& rng) const;
  Task Relabel(const Task& task, RandomStream& rng) const;
  // One k-DPP draw with k = n_way over the current embeddings.
  Task DrawDiverse(RandomStream& rng);
  void RefreshEmbeddings(std::shared_ptr<const EmbeddingTable> table);
  static std::uint64_t Id(const Task& task) { return task.task_id; }

  const ClassPool& pool() const { return pool_; }
  int n_way() const { return n_way_; }
  const std::shared_ptr<const EmbeddingTable>& embeddings() const {
    return embeddings_;
  }

 private:
  ClassPool pool_;
  int n_way_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::optional<LEnsemble> ensemble_;
};

// Regression tasks of one family; DPP kinds are not available here.
class RegressionDomain {
 public:
  using TaskType = RegressionTask;

  explicit RegressionDomain(RegressionFamily family) : family_(family) {}

  RegressionTask DrawUniform(RandomStream& rng) const {
    return SampleRegressionTask(family_, rng);
  }
  RegressionTask Relabel(const RegressionTask& task, RandomStream&) const {
    return task;
  }
  RegressionTask DrawDiverse(RandomStream&);
  void RefreshEmbeddings(std::shared_ptr<const EmbeddingTable>);
  static std::uint64_t Id(const RegressionTask& task) { return task.task_id; }

  RegressionFamily family() const { return family_; }

 private:
  RegressionFamily family_;
};

// Stateful stream of meta-batches for one training run. Single owner:
// NextMetaBatch and ReportDifficulty must not interleave across threads.
template <typename Domain>
class BasicTaskSampler {
 public:
  using TaskType = typename Domain::TaskType;

  struct BufferEntry {
    TaskType task;
    double difficulty = 0.0;
  };

  BasicTaskSampler(SamplerConfig config, Domain domain);

  std::vector<TaskType> NextMetaBatch();

  // OHTM buffer upsert, latest value wins. Throws kNonFinite.
  void ReportDifficulty(const TaskType& task, double difficulty);

  // ddpp only (kWrongKind otherwise); later DPP draws use `table`.
  void RefreshEmbeddings(std::shared_ptr<const EmbeddingTable> table);

  const SamplerConfig& config() const { return config_; }
  std::uint64_t batches_emitted() const { return batches_emitted_; }
  const std::map<std::uint64_t, BufferEntry>& ohtm_buffer() const {
    return buffer_;
  }
  // True once OHTM has left its uniform phase.
  bool ohtm_active() const {
    return buffer_.size() >= static_cast<std::size_t>(config_.ohtm_buffer_min);
  }
  // True while ddpp still draws uniformly.
  bool in_ddpp_warmup() const {
    return batches_emitted_ <
           static_cast<std::uint64_t>(config_.ddpp_warmup_batches);
  }
  // Tasks of the frozen sbu_bounded pool (empty before the first batch).
  const std::vector<TaskType>& bounded_pool() const { return bounded_pool_; }
  // Buffer tasks ranked by (difficulty desc, task id desc), first `count`.
  std::vector<TaskType> HardestTasks(std::size_t count) const;

  Domain& domain() { return domain_; }
  const Domain& domain() const { return domain_; }

 private:
  void AppendUniform(std::vector<TaskType>& out, int count);

  SamplerConfig config_;
  Domain domain_;
  RandomStream rng_;
  std::optional<TaskType> fixed_task_;
  std::vector<TaskType> fixed_batch_;
  std::vector<TaskType> bounded_pool_;
  std::map<std::uint64_t, BufferEntry> buffer_;
  std::uint64_t batches_emitted_ = 0;
};

using TaskSampler = BasicTaskSampler<ClassificationDomain>;
using RegressionTaskSampler = BasicTaskSampler<RegressionDomain>;

// ---------------------------------------------------------------------------
// Implementation.

template <typename Domain>
BasicTaskSampler<Domain>::BasicTaskSampler(SamplerConfig config, Domain domain)
    : config_(config),
      domain_(std::move(domain)),
      rng_(RandomStream(config.seed).Derive("sampler")) {
  config_.Validate();
  if (IsSingleBatchKind(config_.kind)) config_.meta_batch_size = 1;
  if constexpr (std::is_same_v<Domain, RegressionDomain>) {
    if (IsDppKind(config_.kind)) {
      throw Error(ErrorCode::kWrongKind,
                  "DPP samplers need class embeddings; regression tasks "
                  "have none");
    }
  }
}

template <typename Domain>
void BasicTaskSampler<Domain>::AppendUniform(std::vector<TaskType>& out,
                                             int count) {
  for (int i = 0; i < count; ++i) out.push_back(domain_.DrawUniform(rng_));
}

template <typename Domain>
std::vector<typename Domain::TaskType>
BasicTaskSampler<Domain>::HardestTasks(std::size_t count) const {
  std::vector<const BufferEntry*> ranked;
  ranked.reserve(buffer_.size());
  for (const auto& [id, entry] : buffer_) ranked.push_back(&entry);
  count = std::min(count, ranked.size());
  std::partial_sort(ranked.begin(),
                    ranked.begin() + static_cast<std::ptrdiff_t>(count),
                    ranked.end(), [](const BufferEntry* a, const BufferEntry* b) {
                      if (a->difficulty != b->difficulty) {
                        return a->difficulty > b->difficulty;
                      }
                      return Domain::Id(a->task) > Domain::Id(b->task);
                    });
  std::vector<TaskType> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ranked[i]->task);
  return out;
}

template <typename Domain>
std::vector<typename Domain::TaskType>
BasicTaskSampler<Domain>::NextMetaBatch() {
  const int m = config_.meta_batch_size;
  std::vector<TaskType> batch;
  batch.reserve(static_cast<std::size_t>(m));
  switch (config_.kind) {
    case SamplerKind::kUniform:
    case SamplerKind::kSbu:
    case SamplerKind::kSbuUnbounded:
      AppendUniform(batch, m);
      break;
    case SamplerKind::kNdt:
      if (!fixed_task_) fixed_task_ = domain_.DrawUniform(rng_);
      batch.assign(static_cast<std::size_t>(m), *fixed_task_);
      break;
    case SamplerKind::kNdb:
      if (fixed_batch_.empty()) {
        AppendUniform(fixed_batch_, m);
        batch = fixed_batch_;
      } else {
        for (const TaskType& t : fixed_batch_) {
          batch.push_back(domain_.Relabel(t, rng_));
        }
      }
      break;
    case SamplerKind::kNdtb: {
      const TaskType base = domain_.DrawUniform(rng_);
      for (int i = 0; i < m; ++i) batch.push_back(domain_.Relabel(base, rng_));
      break;
    }
    case SamplerKind::kSbuBounded:
      if (bounded_pool_.empty()) {
        AppendUniform(bounded_pool_, config_.bounded_pool_size);
      }
      for (int i = 0; i < m; ++i) {
        batch.push_back(bounded_pool_[rng_.UniformIndex(bounded_pool_.size())]);
      }
      break;
    case SamplerKind::kOhtm: {
      int hard = 0;
      if (ohtm_active()) {
        hard = static_cast<int>(
            std::ceil(static_cast<double>(m) * config_.ohtm_hard_fraction));
        hard = std::min(hard, m);
        for (const TaskType& t : HardestTasks(static_cast<std::size_t>(hard))) {
          batch.push_back(domain_.Relabel(t, rng_));
        }
      }
      AppendUniform(batch, m - static_cast<int>(batch.size()));
      break;
    }
    case SamplerKind::kSdpp:
      for (int i = 0; i < m; ++i) batch.push_back(domain_.DrawDiverse(rng_));
      break;
    case SamplerKind::kDdpp:
      if (in_ddpp_warmup()) {
        AppendUniform(batch, m);
      } else {
        for (int i = 0; i < m; ++i) batch.push_back(domain_.DrawDiverse(rng_));
      }
      break;
  }
  ++batches_emitted_;
  return batch;
}

template <typename Domain>
void BasicTaskSampler<Domain>::ReportDifficulty(const TaskType& task,
                                                double difficulty) {
  if (!std::isfinite(difficulty)) {
    throw Error(ErrorCode::kNonFinite, "task difficulty must be finite");
  }
  auto [it, inserted] =
      buffer_.try_emplace(Domain::Id(task), BufferEntry{task, difficulty});
  if (!inserted) it->second.difficulty = difficulty;
}

template <typename Domain>
void BasicTaskSampler<Domain>::RefreshEmbeddings(
    std::shared_ptr<const EmbeddingTable> table) {
  if (config_.kind != SamplerKind::kDdpp) {
    throw Error(ErrorCode::kWrongKind,
                "only the ddpp sampler accepts refreshed embeddings");
  }
  domain_.RefreshEmbeddings(std::move(table));
}

extern template class BasicTaskSampler<ClassificationDomain>;
extern template class BasicTaskSampler<RegressionDomain>;

}  // namespace episode_forge

#endif  // EPISODE_FORGE_SAMPLERS_H_
