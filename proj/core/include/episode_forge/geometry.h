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

#ifndef EPISODE_FORGE_GEOMETRY_H_
#define EPISODE_FORGE_GEOMETRY_H_

#include <cstddef>
#include <span>
#include <vector>

namespace episode_forge {

using Vector = std::vector<double>;

// m row vectors of a common dimension n, stored row-major. m > n is allowed;
// such a set spans no m-dimensional volume.
class RowMatrix {
 public:
  // Throws kEmptyInput for zero rows and kDimensionMismatch for ragged rows.
  explicit RowMatrix(std::span<const Vector> rows);
  RowMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  // A A^T, row-major m x m.
  std::vector<double> Gram() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

double Dot(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> a);

// Determinant of a square row-major matrix by LU with partial pivoting.
// Returns exactly 0 as soon as a pivot column is identically zero.
double Determinant(std::vector<double> square, std::size_t n);

// Squared m-volume of the parallelotope spanned by the rows: det(A A^T).
// Never negative; m > n yields 0.
double GramVolumeSq(const RowMatrix& a);
double GramVolumeSq(std::span<const Vector> rows);

// Componentwise mean. Throws kEmptyInput / kDimensionMismatch.
Vector MeanVector(std::span<const Vector> vs);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_GEOMETRY_H_
