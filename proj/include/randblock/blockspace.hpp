// Copyright 2026 The randblock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "randblock/rng.hpp"

namespace randblock {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Decomposition of the ambient space into blocks E_1 (+) ... (+) E_m.
///
/// Blocks are indexed from 0 in the C++ API. Configuration files use the
/// 1-based numbering of the math and are translated at the boundary.
class BlockLayout {
 public:
  BlockLayout() = default;
  explicit BlockLayout(std::vector<int> block_dims);

  /// Layout with \p m blocks of dimension \p dim each.
  static BlockLayout uniform(int m, int dim);

  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int block_dim(int j) const { return dims_.at(j); }
  int offset(int j) const { return offsets_.at(j); }
  int total_dim() const { return total_; }
  const std::vector<int>& block_dims() const { return dims_; }

  auto block(Vector& x, int j) const { return x.segment(offsets_[j], dims_[j]); }
  auto block(const Vector& x, int j) const { return x.segment(offsets_[j], dims_[j]); }

  /// Throws DimensionMismatch unless x has total_dim entries.
  void check(const Vector& x, const char* what = "vector") const;

  bool operator==(const BlockLayout& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// p_j, the probability that block j is among the selected blocks.
struct BlockProbabilities {
  std::vector<double> p;
  double p_max = 0.0;
};

/// Finite family {M_i} of block subsets with selection law eta.
///
/// Subsets are stored sorted; validation happens once at construction.
class BlockSubsetScheme {
 public:
  BlockSubsetScheme() = default;
  BlockSubsetScheme(int num_blocks, std::vector<std::vector<int>> subsets,
                    std::vector<double> probs);

  /// The single subset {0..m-1} selected with probability one.
  static BlockSubsetScheme full(int num_blocks);
  /// One subset per block, uniformly.
  static BlockSubsetScheme singletons(int num_blocks);

  int num_blocks() const { return m_; }
  std::size_t size() const { return subsets_.size(); }
  const std::vector<int>& subset(std::size_t i) const { return subsets_.at(i); }
  const std::vector<std::vector<int>>& subsets() const { return subsets_; }
  double prob(std::size_t i) const { return probs_.at(i); }
  const std::vector<double>& probs() const { return probs_; }
  const BlockProbabilities& block_probs() const { return block_probs_; }

  /// Index of the full subset, when present.
  std::optional<std::size_t> full_index() const;

  bool contains_block(std::size_t i, int j) const;

 private:
  int m_ = 0;
  std::vector<std::vector<int>> subsets_;
  std::vector<double> probs_;
  std::vector<double> cumulative_;
  BlockProbabilities block_probs_;

  friend std::size_t sample_subset(const BlockSubsetScheme&, Rng&);
};

/// p_j = sum_i eta_i [j in M_i]. Throws UncoveredBlock when some p_j = 0.
BlockProbabilities block_probabilities(const std::vector<std::vector<int>>& subsets,
                                       const std::vector<double>& probs, int num_blocks);
BlockProbabilities block_probabilities(const BlockSubsetScheme& scheme);

/// All-ones weights (the unweighted norm).
BlockProbabilities unit_probabilities(int num_blocks);

/// ( sum_j ||z_j||^2 / p_j )^{1/2}
double weighted_norm(const BlockLayout& layout, const BlockProbabilities& p, const Vector& z);
double weighted_norm_squared(const BlockLayout& layout, const BlockProbabilities& p,
                             const Vector& z);

/// Draws i with probability eta_i.
std::size_t sample_subset(const BlockSubsetScheme& scheme, Rng& rng);

/// Copy of \p base with block j replaced by \p y.
Vector embed_block(const BlockLayout& layout, const Vector& base, int j, const Vector& y);
Vector extract_block(const BlockLayout& layout, const Vector& x, int j);

}  // namespace randblock
