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

#ifndef EPISODE_FORGE_META_H_
#define EPISODE_FORGE_META_H_

#include <cstddef>
#include <span>
#include <vector>

#include "episode_forge/episodes.h"
#include "episode_forge/mlp.h"

namespace episode_forge {

// Adam with bias correction.
class Adam {
 public:
  explicit Adam(std::size_t n_params, double lr = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void Step(std::span<double> params, std::span<const double> grad);

  double lr() const { return lr_; }
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

enum class MetaOrder { kFirstOrder, kSecondOrder };

// Plain gradient descent on the support MSE, `inner_steps` times.
std::vector<double> MamlAdapt(std::span<const int> sizes,
                              std::span<const double> params,
                              std::span<const MlpSample> support,
                              int inner_steps, double inner_lr);

struct MetaGradient {
  double query_loss = 0.0;  // loss of the adapted parameters
  std::vector<double> grad;
};

// Gradient of the post-adaptation query loss with respect to the initial
// parameters. Second order backpropagates through every inner step with
// Hessian-vector products; first order treats the adapted parameters as
// constants.
MetaGradient MamlMetaGradient(std::span<const int> sizes,
                              std::span<const double> params,
                              std::span<const MlpSample> support,
                              std::span<const MlpSample> query,
                              int inner_steps, double inner_lr,
                              MetaOrder order);

struct MetaStepOptions {
  int inner_steps = 1;
  double inner_lr = 1e-3;
  MetaOrder order = MetaOrder::kFirstOrder;
  int threads = 1;
};

// One outer Adam step on the mean query loss over `meta_batch`. Returns the
// per-episode query losses in batch order.
std::vector<double> MamlMetaStep(std::span<const int> sizes,
                                 std::vector<double>& params,
                                 std::span<const RegressionEpisode> meta_batch,
                                 const MetaStepOptions& options, Adam& outer);

// params += meta_lr * mean_e (W_e - params), W_e being `inner_steps` SGD
// steps on episode e's support. Returns per-episode query losses of W_e.
std::vector<double> ReptileMetaStep(
    std::span<const int> sizes, std::vector<double>& params,
    std::span<const RegressionEpisode> meta_batch, int inner_steps,
    double inner_lr, double meta_lr, int threads = 1);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_META_H_
