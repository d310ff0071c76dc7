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

#include "episode_forge/dpp.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "episode_forge/error.h"
#include "episode_forge/geometry.h"
#include "episode_forge/stats.h"

namespace episode_forge {
namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kRankCutoff = 1e-10;
constexpr std::size_t kMaxEnumerationItems = 20;

// Calls fn(positions) for every k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void ForEachSubset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k > n) return;
  while (true) {
    fn(std::as_const(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

LEnsemble LEnsemble::FromEmbeddings(const EmbeddingTable& table,
                                    std::span<const ClassId> items) {
  if (items.empty()) {
    throw Error(ErrorCode::kEmptyInput, "L-ensemble needs at least one item");
  }
  LEnsemble e;
  e.n_ = items.size();
  e.item_ids_.assign(items.begin(), items.end());
  e.features_.reserve(e.n_);
  for (ClassId id : items) {
    if (!table.Contains(id)) {
      throw Error(ErrorCode::kUnknownItem,
                  "item " + std::to_string(id) + " has no embedding");
    }
    e.features_.push_back(table.at(id));
  }
  e.l_.assign(e.n_ * e.n_, 0.0);
  for (std::size_t i = 0; i < e.n_; ++i) {
    for (std::size_t j = i; j < e.n_; ++j) {
      const double v = Dot(e.features_[i], e.features_[j]);
      e.l_[i * e.n_ + j] = v;
      e.l_[j * e.n_ + i] = v;
    }
  }
  e.Decompose();
  return e;
}

LEnsemble LEnsemble::FromKernel(std::vector<double> kernel, std::size_t n,
                                std::vector<ClassId> item_ids) {
  if (n == 0) {
    throw Error(ErrorCode::kEmptyInput, "L-ensemble needs at least one item");
  }
  if (kernel.size() != n * n) {
    throw Error(ErrorCode::kDimensionMismatch, "kernel is not n x n");
  }
  if (item_ids.empty()) {
    item_ids.resize(n);
    std::iota(item_ids.begin(), item_ids.end(), ClassId{0});
  }
  if (item_ids.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "item id count differs from n");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(kernel[i * n + j] - kernel[j * n + i]) > kSymmetryTolerance) {
        throw Error(ErrorCode::kInvalidArgument, "kernel is not symmetric");
      }
    }
  }
  LEnsemble e;
  e.n_ = n;
  e.l_ = std::move(kernel);
  e.item_ids_ = std::move(item_ids);
  e.Decompose();
  return e;
}

void LEnsemble::Decompose() {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd l(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Symmetrize so tiny asymmetries never reach the solver.
      l(i, j) = 0.5 * (l_[static_cast<std::size_t>(i * n + j)] +
                       l_[static_cast<std::size_t>(j * n + i)]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "eigendecomposition failed");
  }
  eigenvalues_.resize(n_);
  eigenvectors_.resize(n_ * n_);
  double max_eig = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double v = std::max(solver.eigenvalues()(m), 0.0);
    eigenvalues_[static_cast<std::size_t>(m)] = v;
    max_eig = std::max(max_eig, v);
    for (Eigen::Index i = 0; i < n; ++i) {
      eigenvectors_[static_cast<std::size_t>(m * n + i)] =
          solver.eigenvectors()(i, m);
    }
  }
  rank_ = 0;
  for (double v : eigenvalues_) {
    if (max_eig > 0.0 && v > kRankCutoff * max_eig) ++rank_;
  }
}

std::vector<double> LEnsemble::EffectiveEigenvalues() const {
  double max_eig = 0.0;
  for (double v : eigenvalues_) max_eig = std::max(max_eig, v);
  std::vector<double> out(eigenvalues_);
  for (double& v : out) {
    if (!(max_eig > 0.0 && v > kRankCutoff * max_eig)) v = 0.0;
  }
  return out;
}

std::size_t LEnsemble::IndexOf(ClassId item) const {
  const auto it = std::find(item_ids_.begin(), item_ids_.end(), item);
  if (it == item_ids_.end()) {
    throw Error(ErrorCode::kUnknownItem,
                "item " + std::to_string(item) + " is not in the ground set");
  }
  return static_cast<std::size_t>(it - item_ids_.begin());
}

double LEnsemble::PrincipalMinorDet(
    std::span<const std::size_t> positions) const {
  const std::size_t k = positions.size();
  if (k == 0) return 1.0;
  std::vector<double> minor(k * k);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      minor[a * k + b] = kernel(positions[a], positions[b]);
    }
  }
  return std::max(Determinant(std::move(minor), k), 0.0);
}

ElementarySymmetricTable::ElementarySymmetricTable(int k, std::size_t n)
    : k_(k), n_(n), values_(static_cast<std::size_t>(k + 1) * (n + 1), 0.0) {}

ElementarySymmetricTable ElementarySymmetric(std::span<const double> eigenvalues,
                                             int k) {
  const std::size_t n = eigenvalues.size();
  if (k < 0 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kInvalidArgument,
                "elementary symmetric order must lie in [0, N]");
  }
  ElementarySymmetricTable e(k, n);
  for (std::size_t j = 0; j <= n; ++j) e.at(0, j) = 1.0;
  for (int l = 1; l <= k; ++l) {
    e.at(l, 0) = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      e.at(l, j) = e(l, j - 1) + eigenvalues[j - 1] * e(l - 1, j - 1);
    }
  }
  return e;
}

std::vector<ClassId> KdppSample(const LEnsemble& ensemble, int k,
                                RandomStream& rng) {
  const std::size_t n = ensemble.size();
  if (k < 1 || static_cast<std::size_t>(k) > ensemble.rank()) {
    throw Error(ErrorCode::kInfeasibleK,
                "k = " + std::to_string(k) + " exceeds the ensemble rank " +
                    std::to_string(ensemble.rank()) +
                    "; the embeddings cannot span a k-volume");
  }
  // k-DPP probabilities are invariant to scaling L, so normalise for range.
  std::vector<double> lambda = ensemble.EffectiveEigenvalues();
  const double max_eig = *std::max_element(lambda.begin(), lambda.end());
  for (double& v : lambda) v /= max_eig;
  const ElementarySymmetricTable e = ElementarySymmetric(lambda, k);

  // Phase 1: choose k eigenvectors.
  std::vector<std::size_t> chosen;
  int remaining = k;
  for (std::size_t j = n; j >= 1 && remaining > 0; --j) {
    const double denom = e(remaining, j);
    const double accept =
        denom > 0.0 ? lambda[j - 1] * e(remaining - 1, j - 1) / denom : 0.0;
    if (rng.Uniform() < accept) {
      chosen.push_back(j - 1);
      --remaining;
    }
  }
  if (remaining != 0) {
    throw Error(ErrorCode::kInfeasibleK, "eigenvector selection underflowed");
  }

  // Phase 2: sample items from the elementary DPP spanned by the chosen
  // eigenvectors, projecting out each picked coordinate.
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd v(rows, static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    const auto col = ensemble.eigenvector(chosen[c]);
    for (std::size_t i = 0; i < n; ++i) {
      v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = col[i];
    }
  }
  std::vector<ClassId> picked;
  picked.reserve(static_cast<std::size_t>(k));
  std::vector<double> weights(n);
  while (v.cols() > 0) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      weights[static_cast<std::size_t>(i)] = v.row(i).squaredNorm();
      total += weights[static_cast<std::size_t>(i)];
    }
    double u = rng.Uniform() * total;
    Eigen::Index item = rows - 1;
    for (Eigen::Index i = 0; i < rows; ++i) {
      u -= weights[static_cast<std::size_t>(i)];
      if (u < 0.0) {
        item = i;
        break;
      }
    }
    // Guard against landing on a zero-weight trailing row through roundoff.
    while (weights[static_cast<std::size_t>(item)] <= 0.0 && item > 0) --item;
    picked.push_back(ensemble.item_ids()[static_cast<std::size_t>(item)]);

    Eigen::Index pivot = 0;
    v.row(item).cwiseAbs().maxCoeff(&pivot);
    const Eigen::VectorXd pivot_col = v.col(pivot);
    const double pivot_val = pivot_col(item);
    Eigen::MatrixXd next(rows, v.cols() - 1);
    for (Eigen::Index c = 0, out = 0; c < v.cols(); ++c) {
      if (c == pivot) continue;
      next.col(out++) = v.col(c) - pivot_col * (v(item, c) / pivot_val);
    }
    // Modified Gram-Schmidt keeps the remaining basis orthonormal.
    for (Eigen::Index c = 0; c < next.cols(); ++c) {
      for (Eigen::Index p = 0; p < c; ++p) {
        next.col(c) -= next.col(p).dot(next.col(c)) * next.col(p);
      }
      const double norm = next.col(c).norm();
      if (norm > 0.0) next.col(c) /= norm;
    }
    v = std::move(next);
  }
  return picked;
}

std::uint64_t BinomialCoefficient(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

std::vector<SubsetProbability> KdppDistribution(const LEnsemble& ensemble,
                                                int k, std::uint64_t cap) {
  const std::size_t n = ensemble.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kInvalidArgument, "k must lie in [1, N]");
  }
  if (n > kMaxEnumerationItems ||
      BinomialCoefficient(n, static_cast<std::size_t>(k)) > cap) {
    throw Error(ErrorCode::kEnumerationTooLarge,
                "C(" + std::to_string(n) + ", " + std::to_string(k) +
                    ") subsets exceed the enumeration cap");
  }
  std::vector<SubsetProbability> out;
  double total = 0.0;
  ForEachSubset(n, static_cast<std::size_t>(k),
                [&](const std::vector<std::size_t>& idx) {
                  const double det = ensemble.PrincipalMinorDet(idx);
                  out.push_back({idx, det});
                  total += det;
                });
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kInfeasibleK,
                "every k-subset has zero volume; k exceeds the rank");
  }
  for (auto& s : out) s.probability /= total;
  return out;
}

double KdppProb(const LEnsemble& ensemble, std::span<const ClassId> subset,
                int k, std::uint64_t cap) {
  if (subset.size() != static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidArgument, "subset size must equal k");
  }
  std::vector<std::size_t> target;
  for (ClassId id : subset) target.push_back(ensemble.IndexOf(id));
  std::sort(target.begin(), target.end());
  if (std::adjacent_find(target.begin(), target.end()) != target.end()) {
    return 0.0;
  }
  for (const auto& s : KdppDistribution(ensemble, k, cap)) {
    if (s.positions == target) return s.probability;
  }
  return 0.0;
}

GoodnessOfFit KdppGoodnessOfFit(const LEnsemble& ensemble, int k,
                                std::uint64_t draws,
                                const SubsetSampler& sampler,
                                RandomStream& rng, double alpha) {
  GoodnessOfFit fit;
  fit.expected = KdppDistribution(ensemble, k);
  fit.observed.assign(fit.expected.size(), 0);
  fit.draws = draws;
  const std::size_t n = ensemble.size();
  // Bitmask of ground-set positions -> cell index.
  std::vector<std::size_t> lookup(std::size_t{1} << n, fit.expected.size());
  for (std::size_t c = 0; c < fit.expected.size(); ++c) {
    std::size_t mask = 0;
    for (std::size_t p : fit.expected[c].positions) mask |= std::size_t{1} << p;
    lookup[mask] = c;
  }
  for (std::uint64_t d = 0; d < draws; ++d) {
    const std::vector<ClassId> sample = sampler(rng);
    std::size_t mask = 0;
    for (ClassId id : sample) mask |= std::size_t{1} << ensemble.IndexOf(id);
    const std::size_t cell = lookup[mask];
    if (sample.size() != static_cast<std::size_t>(k) ||
        cell == fit.expected.size()) {
      ++fit.impossible_hits;  // wrong size or repeated item
      continue;
    }
    ++fit.observed[cell];
  }

  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  int cells = 0;
  const double total = static_cast<double>(draws);
  for (std::size_t c = 0; c < fit.expected.size(); ++c) {
    const double expected = fit.expected[c].probability * total;
    const double observed = static_cast<double>(fit.observed[c]);
    if (fit.expected[c].probability <= 1e-12) {
      if (fit.observed[c] > 0) fit.impossible_hits += fit.observed[c];
      continue;
    }
    if (expected < 5.0) {
      pooled_obs += observed;
      pooled_exp += expected;
      continue;
    }
    fit.chi_square += (observed - expected) * (observed - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0.0) {
    fit.chi_square +=
        (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  fit.dof = std::max(cells - 1, 1);
  fit.p_value = fit.impossible_hits > 0
                    ? 0.0
                    : ChiSquareSurvival(fit.chi_square, fit.dof);
  fit.passed = fit.impossible_hits == 0 && fit.p_value > alpha;
  return fit;
}

}  // namespace episode_forge
