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

#ifndef EPISODE_FORGE_MLP_H_
#define EPISODE_FORGE_MLP_H_

#include <cstddef>
#include <span>
#include <vector>

#include "episode_forge/episodes.h"
#include "episode_forge/geometry.h"
#include "episode_forge/rng.h"

namespace episode_forge {

// Fully connected network with ReLU hidden layers and a linear output.
// Parameters live in one flat vector, layer by layer: W (out x in,
// row-major) followed by b (out).
class Mlp {
 public:
  explicit Mlp(std::vector<int> layer_sizes);

  // 1 -> 40 -> 40 -> 1.
  static Mlp Regression();

  const std::vector<int>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return static_cast<std::size_t>(sizes_.front()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(sizes_.back()); }
  std::size_t num_params() const { return params_.size(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  // W ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), b likewise.
  void InitRandom(RandomStream& rng);

  Vector Forward(std::span<const double> x) const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;
};

struct MlpSample {
  Vector x;
  Vector y;
};

std::vector<MlpSample> ToSamples(std::span<const RegressionPoint> points);

// Pure functions over (architecture, flat parameters) so adapted parameter
// vectors never need a full Mlp copy.
Vector MlpForward(std::span<const int> sizes, std::span<const double> params,
                  std::span<const double> x);

// (1/|batch|) sum ||f(x) - y||^2.
double MseLoss(std::span<const int> sizes, std::span<const double> params,
               std::span<const MlpSample> batch);

// Returns the loss and writes its exact gradient into `grad`.
double MseLossAndGrad(std::span<const int> sizes,
                      std::span<const double> params,
                      std::span<const MlpSample> batch, std::span<double> grad);

// Hessian of the loss times `direction`, by forward-mode differentiation of
// the backward pass. ReLU contributes no curvature of its own.
void MseHessianVectorProduct(std::span<const int> sizes,
                             std::span<const double> params,
                             std::span<const MlpSample> batch,
                             std::span<const double> direction,
                             std::span<double> out);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_MLP_H_
