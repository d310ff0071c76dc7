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

#include "episode_forge/mlp.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "episode_forge/error.h"

namespace episode_forge {
namespace {

// Value plus one tangent component.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
inline Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }
inline Dual& operator+=(Dual& a, Dual b) {
  a.v += b.v;
  a.d += b.d;
  return a;
}
inline double Value(double x) { return x; }
inline double Value(Dual x) { return x.v; }
inline Dual FromDouble(double x, Dual) { return {x, 0.0}; }
inline double FromDouble(double x, double) { return x; }

std::size_t CountParams(std::span<const int> sizes) {
  std::size_t n = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    n += static_cast<std::size_t>(sizes[l]) *
         static_cast<std::size_t>(sizes[l - 1] + 1);
  }
  return n;
}

void CheckShapes(std::span<const int> sizes, std::size_t n_params) {
  if (sizes.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "MLP needs at least two layers");
  }
  if (CountParams(sizes) != n_params) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parameter vector does not match the architecture");
  }
}

// Forward/backward over a generic scalar. Gradient accumulates into grad.
template <typename T>
T LossAndGrad(std::span<const int> sizes, std::span<const T> params,
              std::span<const MlpSample> batch, std::span<T> grad) {
  const std::size_t layers = sizes.size() - 1;
  std::vector<std::vector<T>> act(layers + 1);
  std::vector<std::vector<T>> pre(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l) {
    act[l].resize(static_cast<std::size_t>(sizes[l]));
    pre[l].resize(static_cast<std::size_t>(sizes[l]));
  }
  std::vector<std::size_t> offset(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offset[l] = off;
    off += static_cast<std::size_t>(sizes[l + 1]) *
           static_cast<std::size_t>(sizes[l] + 1);
  }
  std::vector<T> delta, delta_prev;
  const T zero = T{};
  T loss = zero;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const MlpSample& s : batch) {
    if (s.x.size() != static_cast<std::size_t>(sizes.front()) ||
        s.y.size() != static_cast<std::size_t>(sizes.back())) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "sample shape does not match the network");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      act[0][i] = FromDouble(s.x[i], zero);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t in = static_cast<std::size_t>(sizes[l]);
      const std::size_t out = static_cast<std::size_t>(sizes[l + 1]);
      const T* w = params.data() + offset[l];
      const T* b = w + out * in;
      const bool hidden = l + 1 < layers;
      for (std::size_t o = 0; o < out; ++o) {
        T z = b[o];
        const T* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) z += row[i] * act[l][i];
        pre[l + 1][o] = z;
        act[l + 1][o] = (hidden && Value(z) <= 0.0) ? zero : z;
      }
    }
    // d loss / d output
    delta.assign(static_cast<std::size_t>(sizes.back()), zero);
    for (std::size_t o = 0; o < delta.size(); ++o) {
      const T r = act[layers][o] - FromDouble(s.y[o], zero);
      loss += inv_n * (r * r);
      delta[o] = (2.0 * inv_n) * r;
    }
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t in = static_cast<std::size_t>(sizes[l]);
      const std::size_t out = static_cast<std::size_t>(sizes[l + 1]);
      const T* w = params.data() + offset[l];
      T* gw = grad.data() + offset[l];
      T* gb = gw + out * in;
      for (std::size_t o = 0; o < out; ++o) {
        T* grow = gw + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += delta[o] * act[l][i];
        gb[o] += delta[o];
      }
      if (l == 0) break;
      delta_prev.assign(in, zero);
      for (std::size_t o = 0; o < out; ++o) {
        const T* row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) delta_prev[i] += row[i] * delta[o];
      }
      for (std::size_t i = 0; i < in; ++i) {
        if (Value(pre[l][i]) <= 0.0) delta_prev[i] = zero;
      }
      std::swap(delta, delta_prev);
    }
  }
  return loss;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "MLP needs at least two layers");
  }
  for (int s : sizes_) {
    if (s < 1) throw Error(ErrorCode::kInvalidArgument, "layer size must be >= 1");
  }
  params_.assign(CountParams(sizes_), 0.0);
}

Mlp Mlp::Regression() { return Mlp({1, 40, 40, 1}); }

void Mlp::InitRandom(RandomStream& rng) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = static_cast<std::size_t>(sizes_[l]);
    const std::size_t out = static_cast<std::size_t>(sizes_[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < out * (in + 1); ++i) {
      params_[off + i] = rng.Uniform(-bound, bound);
    }
    off += out * (in + 1);
  }
}

Vector Mlp::Forward(std::span<const double> x) const {
  return MlpForward(sizes_, params_, x);
}

std::vector<MlpSample> ToSamples(std::span<const RegressionPoint> points) {
  std::vector<MlpSample> out;
  out.reserve(points.size());
  for (const RegressionPoint& p : points) out.push_back({{p.x}, {p.y}});
  return out;
}

Vector MlpForward(std::span<const int> sizes, std::span<const double> params,
                  std::span<const double> x) {
  CheckShapes(sizes, params.size());
  if (x.size() != static_cast<std::size_t>(sizes.front())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input has dimension " + std::to_string(x.size()) +
                    ", network expects " + std::to_string(sizes.front()));
  }
  Vector a(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = static_cast<std::size_t>(sizes[l]);
    const std::size_t out = static_cast<std::size_t>(sizes[l + 1]);
    const bool hidden = l + 2 < sizes.size();
    Vector next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = params[off + out * in + o];
      for (std::size_t i = 0; i < in; ++i) z += params[off + o * in + i] * a[i];
      next[o] = (hidden && z <= 0.0) ? 0.0 : z;
    }
    off += out * (in + 1);
    a = std::move(next);
  }
  return a;
}

double MseLoss(std::span<const int> sizes, std::span<const double> params,
               std::span<const MlpSample> batch) {
  CheckShapes(sizes, params.size());
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  double loss = 0.0;
  for (const MlpSample& s : batch) {
    const Vector f = MlpForward(sizes, params, s.x);
    if (f.size() != s.y.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "target shape mismatch");
    }
    for (std::size_t o = 0; o < f.size(); ++o) {
      loss += (f[o] - s.y[o]) * (f[o] - s.y[o]);
    }
  }
  return loss / static_cast<double>(batch.size());
}

double MseLossAndGrad(std::span<const int> sizes,
                      std::span<const double> params,
                      std::span<const MlpSample> batch,
                      std::span<double> grad) {
  CheckShapes(sizes, params.size());
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (grad.size() != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient buffer size");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  return LossAndGrad<double>(sizes, params, batch, grad);
}

void MseHessianVectorProduct(std::span<const int> sizes,
                             std::span<const double> params,
                             std::span<const MlpSample> batch,
                             std::span<const double> direction,
                             std::span<double> out) {
  CheckShapes(sizes, params.size());
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "empty batch");
  if (direction.size() != params.size() || out.size() != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "direction/output size");
  }
  std::vector<Dual> p(params.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = {params[i], direction[i]};
  std::vector<Dual> g(params.size());
  LossAndGrad<Dual>(sizes, p, batch, g);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i].d;
}

}  // namespace episode_forge
