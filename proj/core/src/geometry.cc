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

#include "episode_forge/geometry.h"

#include <cmath>
#include <string>
#include <utility>

#include "episode_forge/error.h"

namespace episode_forge {
namespace {

std::size_t CommonDimension(std::span<const Vector> rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyInput, "row set is empty");
  }
  const std::size_t n = rows.front().size();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row " + std::to_string(i) + " has dimension " +
                      std::to_string(rows[i].size()) + ", expected " +
                      std::to_string(n));
    }
  }
  return n;
}

}  // namespace

RowMatrix::RowMatrix(std::span<const Vector> rows)
    : rows_(rows.size()), cols_(CommonDimension(rows)) {
  data_.reserve(rows_ * cols_);
  for (const Vector& r : rows) data_.insert(data_.end(), r.begin(), r.end());
}

RowMatrix::RowMatrix(std::size_t rows, std::size_t cols,
                     std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0) throw Error(ErrorCode::kEmptyInput, "row set is empty");
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "data size does not match rows x cols");
  }
}

std::vector<double> RowMatrix::Gram() const {
  std::vector<double> g(rows_ * rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i; j < rows_; ++j) {
      const double v = Dot(row(i), row(j));
      g[i * rows_ + j] = v;
      g[j * rows_ + i] = v;
    }
  }
  return g;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "dot of unequal lengths");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double SquaredNorm(std::span<const double> a) { return Dot(a, a); }

double Determinant(std::vector<double> m, std::size_t n) {
  if (m.size() != n * n) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix is not n x n");
  }
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(m[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(m[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(m[col * n + c], m[pivot * n + c]);
      }
      det = -det;
    }
    const double p = m[col * n + col];
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r * n + col] / p;
      if (f == 0.0) continue;
      for (std::size_t c = col + 1; c < n; ++c) {
        m[r * n + c] -= f * m[col * n + c];
      }
      m[r * n + col] = 0.0;
    }
  }
  return det;
}

double GramVolumeSq(const RowMatrix& a) {
  if (a.rows() > a.cols()) return 0.0;
  const double det = Determinant(a.Gram(), a.rows());
  // A Gram matrix is PSD, so a negative determinant is pure roundoff.
  return det > 0.0 ? det : 0.0;
}

double GramVolumeSq(std::span<const Vector> rows) {
  return GramVolumeSq(RowMatrix(rows));
}

Vector MeanVector(std::span<const Vector> vs) {
  const std::size_t n = CommonDimension(vs);
  Vector mean(n, 0.0);
  for (const Vector& v : vs) {
    for (std::size_t i = 0; i < n; ++i) mean[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : mean) x *= inv;
  return mean;
}

}  // namespace episode_forge
