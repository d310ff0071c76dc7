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

#ifndef EPISODE_FORGE_PROTONET_H_
#define EPISODE_FORGE_PROTONET_H_

#include <cstddef>
#include <span>
#include <vector>

#include "episode_forge/embeddings.h"
#include "episode_forge/episodes.h"
#include "episode_forge/geometry.h"
#include "episode_forge/meta.h"
#include "episode_forge/rng.h"

namespace episode_forge {

// Linear embedding g(x) = W x with W of shape out_dim x in_dim. Prototypes
// are computed per episode, so the model carries no class state.
class ProtoModel {
 public:
  ProtoModel(std::size_t out_dim, std::size_t in_dim);

  static ProtoModel Identity(std::size_t dim);
  // Identity plus N(0, scale^2) perturbation on every entry (square only
  // when out_dim == in_dim; otherwise a scaled Gaussian map).
  static ProtoModel Random(std::size_t out_dim, std::size_t in_dim,
                           double scale, RandomStream& rng);

  std::size_t out_dim() const { return out_; }
  std::size_t in_dim() const { return in_; }
  std::vector<double>& weights() { return w_; }
  const std::vector<double>& weights() const { return w_; }

  Vector Embed(std::span<const double> x) const;

 private:
  std::size_t out_;
  std::size_t in_;
  std::vector<double> w_;
};

// Per query: softmax over k of -||g(x) - c_k||^2, c_k the mean embedded
// support example of label k. Rows are aligned with episode.query.
std::vector<Vector> ProtonetPredict(const ProtoModel& model,
                                    const Episode& episode);

struct ProtoLoss {
  double loss = 0.0;      // mean query cross-entropy
  double accuracy = 0.0;  // fraction of queries whose argmax is correct
  std::vector<double> grad;  // d loss / d W, empty unless requested
};

ProtoLoss ProtonetLoss(const ProtoModel& model, const Episode& episode,
                       bool with_grad);

// One Adam step on the mean query cross-entropy of `meta_batch`. Returns
// per-episode losses (pre-update), in batch order; `accuracies`, when given,
// receives the matching query accuracies.
std::vector<double> ProtonetTrainStep(ProtoModel& model,
                                      std::span<const Episode> meta_batch,
                                      Adam& optimizer, int threads = 1,
                                      std::vector<double>* accuracies = nullptr);

// Per pool class: mean of g(x) over `samples_per_class` fresh examples.
// Table ids equal the pool's class ids.
EmbeddingTable ClassEmbeddingsFromModel(const ProtoModel& model,
                                        const ClassPool& pool,
                                        int samples_per_class,
                                        RandomStream& rng);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_PROTONET_H_
