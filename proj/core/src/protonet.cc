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

#include "episode_forge/protonet.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "episode_forge/error.h"
#include "episode_forge/parallel.h"

namespace episode_forge {
namespace {

// Mean raw support input per label. Since g is linear, the prototype of
// label k is g(mean_k).
std::vector<Vector> SupportMeans(const Episode& episode, std::size_t in_dim) {
  std::vector<Vector> means(static_cast<std::size_t>(episode.n_way),
                            Vector(in_dim, 0.0));
  std::vector<int> counts(static_cast<std::size_t>(episode.n_way), 0);
  for (const LabeledExample& s : episode.support) {
    if (s.x.size() != in_dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "support example dimension differs from the model input");
    }
    const auto k = static_cast<std::size_t>(s.label);
    for (std::size_t i = 0; i < in_dim; ++i) means[k][i] += s.x[i];
    ++counts[k];
  }
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (counts[k] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(k) + " has no support examples");
    }
    for (double& v : means[k]) v /= counts[k];
  }
  return means;
}

void Softmax(Vector& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  for (double& l : logits) l /= z;
}

}  // namespace

ProtoModel::ProtoModel(std::size_t out_dim, std::size_t in_dim)
    : out_(out_dim), in_(in_dim), w_(out_dim * in_dim, 0.0) {
  if (out_ == 0 || in_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dims must be >= 1");
  }
}

ProtoModel ProtoModel::Identity(std::size_t dim) {
  ProtoModel m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m.w_[i * dim + i] = 1.0;
  return m;
}

ProtoModel ProtoModel::Random(std::size_t out_dim, std::size_t in_dim,
                              double scale, RandomStream& rng) {
  ProtoModel m(out_dim, in_dim);
  for (std::size_t o = 0; o < out_dim; ++o) {
    for (std::size_t i = 0; i < in_dim; ++i) {
      const double base = (out_dim == in_dim && o == i) ? 1.0 : 0.0;
      m.w_[o * in_dim + i] = base + scale * rng.Normal();
    }
  }
  return m;
}

Vector ProtoModel::Embed(std::span<const double> x) const {
  if (x.size() != in_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has dimension " + std::to_string(x.size()) +
                    ", model expects " + std::to_string(in_));
  }
  Vector z(out_, 0.0);
  for (std::size_t o = 0; o < out_; ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < in_; ++i) s += w_[o * in_ + i] * x[i];
    z[o] = s;
  }
  return z;
}

ProtoLoss ProtonetLoss(const ProtoModel& model, const Episode& episode,
                       bool with_grad) {
  if (episode.query.empty()) {
    throw Error(ErrorCode::kEmptyInput, "episode has no queries");
  }
  const std::size_t in = model.in_dim();
  const std::size_t out = model.out_dim();
  const auto means = SupportMeans(episode, in);
  const std::size_t n_way = means.size();
  const auto& w = model.weights();

  ProtoLoss res;
  if (with_grad) res.grad.assign(out * in, 0.0);
  const double inv_q = 1.0 / static_cast<double>(episode.query.size());
  std::vector<Vector> u(n_way, Vector(in));
  std::vector<Vector> wu(n_way, Vector(out));
  Vector logits(n_way);
  int correct = 0;
  for (const LabeledExample& q : episode.query) {
    if (q.x.size() != in) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "query example dimension differs from the model input");
    }
    for (std::size_t k = 0; k < n_way; ++k) {
      for (std::size_t i = 0; i < in; ++i) u[k][i] = q.x[i] - means[k][i];
      double d2 = 0.0;
      for (std::size_t o = 0; o < out; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * u[k][i];
        wu[k][o] = s;
        d2 += s * s;
      }
      logits[k] = -d2;
    }
    const auto truth = static_cast<std::size_t>(q.label);
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == truth) ++correct;
    Softmax(logits);
    res.loss -= inv_q * std::log(std::max(logits[truth], 1e-300));
    if (!with_grad) continue;
    // d loss / d logit_k = (p_k - [k == y]) / Q; d logit_k / d W = -2 W u u^T.
    for (std::size_t k = 0; k < n_way; ++k) {
      const double coeff =
          -2.0 * inv_q * (logits[k] - (k == truth ? 1.0 : 0.0));
      if (coeff == 0.0) continue;
      for (std::size_t o = 0; o < out; ++o) {
        const double a = coeff * wu[k][o];
        double* grow = res.grad.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += a * u[k][i];
      }
    }
  }
  res.accuracy = static_cast<double>(correct) * inv_q;
  return res;
}

std::vector<Vector> ProtonetPredict(const ProtoModel& model,
                                    const Episode& episode) {
  const auto means = SupportMeans(episode, model.in_dim());
  std::vector<Vector> protos;
  protos.reserve(means.size());
  for (const Vector& m : means) protos.push_back(model.Embed(m));
  std::vector<Vector> out;
  out.reserve(episode.query.size());
  for (const LabeledExample& q : episode.query) {
    const Vector z = model.Embed(q.x);
    Vector logits(protos.size());
    for (std::size_t k = 0; k < protos.size(); ++k) {
      double d2 = 0.0;
      for (std::size_t o = 0; o < z.size(); ++o) {
        d2 += (z[o] - protos[k][o]) * (z[o] - protos[k][o]);
      }
      logits[k] = -d2;
    }
    Softmax(logits);
    out.push_back(std::move(logits));
  }
  return out;
}

std::vector<double> ProtonetTrainStep(ProtoModel& model,
                                      std::span<const Episode> meta_batch,
                                      Adam& optimizer, int threads,
                                      std::vector<double>* accuracies) {
  if (meta_batch.empty()) {
    throw Error(ErrorCode::kEmptyInput, "meta-batch is empty");
  }
  std::vector<ProtoLoss> parts(meta_batch.size());
  ParallelFor(meta_batch.size(), threads, [&](std::size_t e) {
    parts[e] = ProtonetLoss(model, meta_batch[e], /*with_grad=*/true);
  });
  std::vector<double> grad(model.weights().size(), 0.0);
  std::vector<double> losses;
  losses.reserve(parts.size());
  const double inv = 1.0 / static_cast<double>(parts.size());
  for (const ProtoLoss& p : parts) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += inv * p.grad[i];
    losses.push_back(p.loss);
  }
  if (accuracies != nullptr) {
    accuracies->clear();
    for (const ProtoLoss& p : parts) accuracies->push_back(p.accuracy);
  }
  optimizer.Step(model.weights(), grad);
  return losses;
}

EmbeddingTable ClassEmbeddingsFromModel(const ProtoModel& model,
                                        const ClassPool& pool,
                                        int samples_per_class,
                                        RandomStream& rng) {
  if (samples_per_class < 1) {
    throw Error(ErrorCode::kInvalidArgument, "samples_per_class must be >= 1");
  }
  EmbeddingTable table(model.out_dim());
  for (ClassId c : pool.classes()) {
    Vector mean(model.out_dim(), 0.0);
    for (int s = 0; s < samples_per_class; ++s) {
      const Vector z = model.Embed(pool.DrawExample(c, rng));
      for (std::size_t o = 0; o < mean.size(); ++o) mean[o] += z[o];
    }
    for (double& v : mean) v /= samples_per_class;
    table.Insert(c, std::to_string(c), std::move(mean));
  }
  return table;
}

}  // namespace episode_forge
