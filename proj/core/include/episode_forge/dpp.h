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

#ifndef EPISODE_FORGE_DPP_H_
#define EPISODE_FORGE_DPP_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "episode_forge/embeddings.h"
#include "episode_forge/rng.h"

namespace episode_forge {

// L-ensemble over a ground set of N items: L[i][j] = <psi_i, psi_j>.
// Immutable after construction; the eigendecomposition is computed once.
class LEnsemble {
 public:
  // Throws kUnknownItem / kMissingEmbedding for items not in the table.
  static LEnsemble FromEmbeddings(const EmbeddingTable& table,
                                  std::span<const ClassId> items);
  // `kernel` is row-major n x n, symmetric within 1e-9. Item ids default to
  // 0..n-1.
  static LEnsemble FromKernel(std::vector<double> kernel, std::size_t n,
                              std::vector<ClassId> item_ids = {});

  std::size_t size() const { return n_; }
  double kernel(std::size_t i, std::size_t j) const { return l_[i * n_ + j]; }
  std::span<const double> kernel_data() const { return l_; }
  // Ascending, clamped at 0.
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  // Unit eigenvector for eigenvalues()[m], length N.
  std::span<const double> eigenvector(std::size_t m) const {
    return {eigenvectors_.data() + m * n_, n_};
  }
  const std::vector<ClassId>& item_ids() const { return item_ids_; }
  // Feature rows psi_i when built from embeddings; empty otherwise.
  const std::vector<Vector>& features() const { return features_; }

  // Eigenvalues above 1e-10 * max eigenvalue.
  std::size_t rank() const { return rank_; }
  // Eigenvalues with the rank cutoff applied (tiny ones set to exactly 0).
  std::vector<double> EffectiveEigenvalues() const;

  // Position of `item` in the ground set; throws kUnknownItem.
  std::size_t IndexOf(ClassId item) const;
  // det(L_A) for ground-set positions A.
  double PrincipalMinorDet(std::span<const std::size_t> positions) const;

 private:
  LEnsemble() = default;
  void Decompose();

  std::size_t n_ = 0;
  std::vector<double> l_;
  std::vector<double> eigenvalues_;
  std::vector<double> eigenvectors_;
  std::vector<ClassId> item_ids_;
  std::vector<Vector> features_;
  std::size_t rank_ = 0;
};

// e_l^n for 0 <= l <= k, 0 <= n <= N: the degree-l elementary symmetric
// polynomial of the first n eigenvalues.
class ElementarySymmetricTable {
 public:
  ElementarySymmetricTable(int k, std::size_t n);

  int k() const { return k_; }
  std::size_t n() const { return n_; }
  double operator()(int l, std::size_t n) const {
    return values_[static_cast<std::size_t>(l) * (n_ + 1) + n];
  }
  double& at(int l, std::size_t n) {
    return values_[static_cast<std::size_t>(l) * (n_ + 1) + n];
  }

 private:
  int k_;
  std::size_t n_;
  std::vector<double> values_;
};

ElementarySymmetricTable ElementarySymmetric(std::span<const double> eigenvalues,
                                             int k);

// Exact k-DPP draw: P(A) = det(L_A) / sum_{|B|=k} det(L_B).
// Throws kInfeasibleK when k is 0 or exceeds rank(L).
std::vector<ClassId> KdppSample(const LEnsemble& ensemble, int k,
                                RandomStream& rng);

inline constexpr std::uint64_t kDefaultEnumerationCap = 200000;

// Brute-force probability by enumerating every k-subset. Throws
// kEnumerationTooLarge when C(N, k) exceeds `cap` or N > 20.
double KdppProb(const LEnsemble& ensemble, std::span<const ClassId> subset,
                int k, std::uint64_t cap = kDefaultEnumerationCap);

struct SubsetProbability {
  std::vector<std::size_t> positions;  // ascending ground-set positions
  double probability = 0.0;
};

// Full k-subset distribution in lexicographic order.
std::vector<SubsetProbability> KdppDistribution(
    const LEnsemble& ensemble, int k,
    std::uint64_t cap = kDefaultEnumerationCap);

std::uint64_t BinomialCoefficient(std::size_t n, std::size_t k);

struct GoodnessOfFit {
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool passed = false;
  std::uint64_t draws = 0;
  // Draws landing on subsets whose exact probability is 0.
  std::uint64_t impossible_hits = 0;
  // Observed count per subset, aligned with KdppDistribution order.
  std::vector<std::uint64_t> observed;
  std::vector<SubsetProbability> expected;
};

using SubsetSampler = std::function<std::vector<ClassId>(RandomStream&)>;

// Pearson chi-square of `draws` samples against the exact distribution.
// Cells with expected count below 5 are pooled; any hit on a zero-probability
// subset fails the check outright.
GoodnessOfFit KdppGoodnessOfFit(const LEnsemble& ensemble, int k,
                                std::uint64_t draws,
                                const SubsetSampler& sampler,
                                RandomStream& rng, double alpha = 0.01);

}  // namespace episode_forge

#endif  // EPISODE_FORGE_DPP_H_
