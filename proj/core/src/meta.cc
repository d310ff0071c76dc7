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

#include "episode_forge/meta.h"

#include <cmath>
#include <utility>

#include "episode_forge/error.h"
#include "episode_forge/parallel.h"

namespace episode_forge {

Adam::Adam(std::size_t n_params, double lr, double beta1, double beta2,
           double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n_params, 0.0),
      v_(n_params, 0.0) {}

void Adam::Step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "Adam state size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

std::vector<double> MamlAdapt(std::span<const int> sizes,
                              std::span<const double> params,
                              std::span<const MlpSample> support,
                              int inner_steps, double inner_lr) {
  if (inner_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "inner_steps must be >= 0");
  }
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> grad(theta.size());
  for (int s = 0; s < inner_steps; ++s) {
    MseLossAndGrad(sizes, theta, support, grad);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= inner_lr * grad[i];
  }
  return theta;
}

MetaGradient MamlMetaGradient(std::span<const int> sizes,
                              std::span<const double> params,
                              std::span<const MlpSample> support,
                              std::span<const MlpSample> query,
                              int inner_steps, double inner_lr,
                              MetaOrder order) {
  const std::size_t n = params.size();
  // trajectory[j] holds the parameters before inner step j.
  std::vector<std::vector<double>> trajectory;
  std::vector<double> theta(params.begin(), params.end());
  std::vector<double> grad(n);
  for (int s = 0; s < inner_steps; ++s) {
    if (order == MetaOrder::kSecondOrder) trajectory.push_back(theta);
    MseLossAndGrad(sizes, theta, support, grad);
    for (std::size_t i = 0; i < n; ++i) theta[i] -= inner_lr * grad[i];
  }
  MetaGradient out;
  out.grad.assign(n, 0.0);
  out.query_loss = MseLossAndGrad(sizes, theta, query, out.grad);
  if (order == MetaOrder::kSecondOrder) {
    // d theta_{j+1} / d theta_j = I - lr * H_j, applied right to left.
    std::vector<double> hv(n);
    for (std::size_t j = trajectory.size(); j-- > 0;) {
      MseHessianVectorProduct(sizes, trajectory[j], support, out.grad, hv);
      for (std::size_t i = 0; i < n; ++i) out.grad[i] -= inner_lr * hv[i];
    }
  }
  return out;
}

std::vector<double> MamlMetaStep(std::span<const int> sizes,
                                 std::vector<double>& params,
                                 std::span<const RegressionEpisode> meta_batch,
                                 const MetaStepOptions& options, Adam& outer) {
  if (meta_batch.empty()) {
    throw Error(ErrorCode::kEmptyInput, "meta-batch is empty");
  }
  std::vector<MetaGradient> parts(meta_batch.size());
  ParallelFor(meta_batch.size(), options.threads, [&](std::size_t e) {
    const auto support = ToSamples(meta_batch[e].support);
    const auto query = ToSamples(meta_batch[e].query);
    parts[e] = MamlMetaGradient(sizes, params, support, query,
                                options.inner_steps, options.inner_lr,
                                options.order);
  });
  std::vector<double> mean(params.size(), 0.0);
  std::vector<double> losses;
  losses.reserve(parts.size());
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (const MetaGradient& part : parts) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += inv * part.grad[i];
    losses.push_back(part.query_loss);
  }
  outer.Step(params, mean);
  return losses;
}

std::vector<double> ReptileMetaStep(
    std::span<const int> sizes, std::vector<double>& params,
    std::span<const RegressionEpisode> meta_batch, int inner_steps,
    double inner_lr, double meta_lr, int threads) {
  if (meta_batch.empty()) {
    throw Error(ErrorCode::kEmptyInput, "meta-batch is empty");
  }
  std::vector<std::vector<double>> adapted(meta_batch.size());
  std::vector<double> losses(meta_batch.size());
  ParallelFor(meta_batch.size(), threads, [&](std::size_t e) {
    const auto support = ToSamples(meta_batch[e].support);
    adapted[e] = MamlAdapt(sizes, params, support, inner_steps, inner_lr);
    losses[e] = MseLoss(sizes, adapted[e], ToSamples(meta_batch[e].query));
  });
  std::vector<double> step(params.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(adapted.size());
  for (const auto& w : adapted) {
    for (std::size_t i = 0; i < step.size(); ++i) {
      step[i] += inv * (w[i] - params[i]);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i] += meta_lr * step[i];
  return losses;
}

}  // namespace episode_forge
