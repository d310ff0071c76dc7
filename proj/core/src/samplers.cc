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

#include "episode_forge/samplers.h"

#include <string>

namespace episode_forge {

std::string_view SamplerKindName(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kNdt: return "ndt";
    case SamplerKind::kNdb: return "ndb";
    case SamplerKind::kNdtb: return "ndtb";
    case SamplerKind::kSbu: return "sbu";
    case SamplerKind::kSbuBounded: return "sbu_bounded";
    case SamplerKind::kSbuUnbounded: return "sbu_unbounded";
    case SamplerKind::kOhtm: return "ohtm";
    case SamplerKind::kSdpp: return "sdpp";
    case SamplerKind::kDdpp: return "ddpp";
  }
  return "uniform";
}

SamplerKind ParseSamplerKind(std::string_view name) {
  std::string norm(name);
  for (char& c : norm) {
    if (c == '-') c = '_';
  }
  for (SamplerKind k : AllSamplerKinds()) {
    if (SamplerKindName(k) == norm) return k;
  }
  if (norm == "s_dpp") return SamplerKind::kSdpp;
  if (norm == "d_dpp") return SamplerKind::kDdpp;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown sampler '" + std::string(name) + "'");
}

const std::vector<SamplerKind>& AllSamplerKinds() {
  static const std::vector<SamplerKind> kinds = {
      SamplerKind::kUniform,    SamplerKind::kNdt,
      SamplerKind::kNdb,        SamplerKind::kNdtb,
      SamplerKind::kSbu,        SamplerKind::kSbuBounded,
      SamplerKind::kSbuUnbounded, SamplerKind::kOhtm,
      SamplerKind::kSdpp,       SamplerKind::kDdpp};
  return kinds;
}

bool IsSingleBatchKind(SamplerKind kind) {
  return kind == SamplerKind::kSbu || kind == SamplerKind::kSbuBounded ||
         kind == SamplerKind::kSbuUnbounded;
}

bool IsDppKind(SamplerKind kind) {
  return kind == SamplerKind::kSdpp || kind == SamplerKind::kDdpp;
}

int SamplerConfig::EffectiveMetaBatchSize() const {
  return IsSingleBatchKind(kind) ? 1 : meta_batch_size;
}

void SamplerConfig::Validate() const {
  if (n_way < 1) throw Error(ErrorCode::kInvalidArgument, "n_way must be >= 1");
  if (meta_batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "meta_batch_size must be >= 1");
  }
  if (!(ohtm_hard_fraction > 0.0 && ohtm_hard_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "ohtm_hard_fraction must lie in (0, 1)");
  }
  if (ohtm_buffer_min < 0 || ddpp_warmup_batches < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "ohtm_buffer_min and ddpp_warmup_batches must be >= 0");
  }
  if (bounded_pool_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bounded_pool_size must be >= 1");
  }
}

ClassificationDomain::ClassificationDomain(
    ClassPool pool, int n_way, std::shared_ptr<const EmbeddingTable> embeddings)
    : pool_(std::move(pool)), n_way_(n_way), embeddings_(std::move(embeddings)) {
  if (n_way_ < 1 || pool_.size() < static_cast<std::size_t>(n_way_)) {
    throw Error(ErrorCode::kPoolTooSmall,
                "pool of " + std::to_string(pool_.size()) +
                    " classes cannot form " + std::to_string(n_way_) +
                    "-way tasks");
  }
}

Task ClassificationDomain::DrawUniform(RandomStream& rng) const {
  const auto idx = rng.SampleWithoutReplacement(
      pool_.size(), static_cast<std::size_t>(n_way_));
  std::vector<ClassId> classes;
  classes.reserve(idx.size());
  for (std::size_t i : idx) classes.push_back(pool_.classes()[i]);
  return Task::Make(std::move(classes), rng.Permutation(n_way_));
}

Task ClassificationDomain::Relabel(const Task& task, RandomStream& rng) const {
  Task t = task;
  t.label_perm = rng.Permutation(task.n_way());
  return t;
}

Task ClassificationDomain::DrawDiverse(RandomStream& rng) {
  if (!ensemble_) {
    if (!embeddings_) {
      throw Error(ErrorCode::kMissingEmbedding,
                  "DPP sampling needs an embedding table");
    }
    for (ClassId c : pool_.classes()) {
      if (!embeddings_->Contains(c)) {
        throw Error(ErrorCode::kMissingEmbedding,
                    "no embedding for pool class " + std::to_string(c));
      }
    }
    ensemble_ = LEnsemble::FromEmbeddings(*embeddings_, pool_.classes());
  }
  std::vector<ClassId> classes = KdppSample(*ensemble_, n_way_, rng);
  return Task::Make(std::move(classes), rng.Permutation(n_way_));
}

void ClassificationDomain::RefreshEmbeddings(
    std::shared_ptr<const EmbeddingTable> table) {
  if (!table) {
    throw Error(ErrorCode::kMissingEmbedding, "refresh with a null table");
  }
  for (ClassId c : pool_.classes()) {
    if (!table->Contains(c)) {
      throw Error(ErrorCode::kMissingEmbedding,
                  "refreshed table lacks pool class " + std::to_string(c));
    }
  }
  embeddings_ = std::move(table);
  ensemble_.reset();
}

RegressionTask RegressionDomain::DrawDiverse(RandomStream&) {
  throw Error(ErrorCode::kWrongKind, "regression tasks have no DPP sampler");
}

void RegressionDomain::RefreshEmbeddings(std::shared_ptr<const EmbeddingTable>) {
  throw Error(ErrorCode::kWrongKind, "regression tasks have no embeddings");
}

template class BasicTaskSampler<ClassificationDomain>;
template class BasicTaskSampler<RegressionDomain>;

}  // namespace episode_forge
