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

#include "randblock/blockspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "randblock/errors.hpp"

namespace randblock {

BlockLayout::BlockLayout(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw InvalidArgument("block layout needs at least one block");
  offsets_.reserve(dims_.size());
  for (int d : dims_) {
    if (d < 1) throw InvalidArgument("block dimensions must be positive");
    offsets_.push_back(total_);
    total_ += d;
  }
}

BlockLayout BlockLayout::uniform(int m, int dim) {
  return BlockLayout(std::vector<int>(static_cast<std::size_t>(m), dim));
}

void BlockLayout::check(const Vector& x, const char* what) const {
  if (x.size() != total_) {
    throw DimensionMismatch(std::string(what) + " has length " + std::to_string(x.size()) +
                            ", layout expects " + std::to_string(total_));
  }
}

BlockProbabilities block_probabilities(const std::vector<std::vector<int>>& subsets,
                                       const std::vector<double>& probs, int num_blocks) {
  if (subsets.size() != probs.size()) {
    throw InvalidScheme("scheme has " + std::to_string(subsets.size()) + " subsets but " +
                        std::to_string(probs.size()) + " probabilities");
  }
  BlockProbabilities out;
  out.p.assign(static_cast<std::size_t>(num_blocks), 0.0);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    for (int j : subsets[i]) out.p.at(static_cast<std::size_t>(j)) += probs[i];
  }
  for (int j = 0; j < num_blocks; ++j) {
    if (!(out.p[j] > 0.0)) {
      throw UncoveredBlock("block " + std::to_string(j + 1) +
                           " is never selected with positive probability");
    }
    // Rounding in the sum can leave p_j a few ulps above one.
    out.p[j] = std::min(out.p[j], 1.0);
  }
  out.p_max = *std::max_element(out.p.begin(), out.p.end());
  return out;
}

BlockProbabilities block_probabilities(const BlockSubsetScheme& scheme) {
  return block_probabilities(scheme.subsets(), scheme.probs(), scheme.num_blocks());
}

BlockProbabilities unit_probabilities(int num_blocks) {
  return {std::vector<double>(static_cast<std::size_t>(num_blocks), 1.0), 1.0};
}

BlockSubsetScheme::BlockSubsetScheme(int num_blocks, std::vector<std::vector<int>> subsets,
                                     std::vector<double> probs)
    : m_(num_blocks), subsets_(std::move(subsets)), probs_(std::move(probs)) {
  if (m_ < 1) throw InvalidScheme("scheme needs at least one block");
  if (subsets_.empty()) throw InvalidScheme("scheme needs at least one subset");
  for (auto& s : subsets_) {
    if (s.empty()) throw InvalidScheme("block subsets must be nonempty");
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
      throw InvalidScheme("block subset lists a block twice");
    }
    if (s.front() < 0 || s.back() >= m_) {
      throw InvalidScheme("block subset refers to a block outside 1.." + std::to_string(m_));
    }
  }
  for (std::size_t a = 0; a < subsets_.size(); ++a) {
    for (std::size_t b = a + 1; b < subsets_.size(); ++b) {
      if (subsets_[a] == subsets_[b]) throw InvalidScheme("block subsets must be distinct");
    }
  }
  double total = 0.0;
  for (double q : probs_) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw InvalidScheme("subset probabilities must be nonnegative");
    }
    total += q;
  }
  if (probs_.size() == subsets_.size() && std::abs(total - 1.0) > 1e-12) {
    throw InvalidScheme("subset probabilities sum to " + std::to_string(total) + ", not 1");
  }
  block_probs_ = block_probabilities(subsets_, probs_, m_);
  cumulative_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cumulative_.begin());
}

BlockSubsetScheme BlockSubsetScheme::full(int num_blocks) {
  std::vector<int> all(static_cast<std::size_t>(num_blocks));
  std::iota(all.begin(), all.end(), 0);
  return BlockSubsetScheme(num_blocks, {all}, {1.0});
}

BlockSubsetScheme BlockSubsetScheme::singletons(int num_blocks) {
  std::vector<std::vector<int>> subsets;
  for (int j = 0; j < num_blocks; ++j) subsets.push_back({j});
  return BlockSubsetScheme(num_blocks, std::move(subsets),
                           std::vector<double>(static_cast<std::size_t>(num_blocks),
                                               1.0 / num_blocks));
}

std::optional<std::size_t> BlockSubsetScheme::full_index() const {
  for (std::size_t i = 0; i < subsets_.size(); ++i) {
    if (static_cast<int>(subsets_[i].size()) == m_) return i;
  }
  return std::nullopt;
}

bool BlockSubsetScheme::contains_block(std::size_t i, int j) const {
  const auto& s = subsets_.at(i);
  return std::binary_search(s.begin(), s.end(), j);
}

double weighted_norm_squared(const BlockLayout& layout, const BlockProbabilities& p,
                             const Vector& z) {
  layout.check(z);
  if (static_cast<int>(p.p.size()) != layout.num_blocks()) {
    throw DimensionMismatch("block probabilities do not match the layout");
  }
  double s = 0.0;
  for (int j = 0; j < layout.num_blocks(); ++j) s += layout.block(z, j).squaredNorm() / p.p[j];
  return s;
}

double weighted_norm(const BlockLayout& layout, const BlockProbabilities& p, const Vector& z) {
  return std::sqrt(weighted_norm_squared(layout, p, z));
}

std::size_t sample_subset(const BlockSubsetScheme& scheme, Rng& rng) {
  const auto n = scheme.cumulative_.size();
  if (n == 1) {
    rng.next_u64();
    return 0;
  }
  // Scale by the stored total so the last positive-probability subset
  // absorbs rounding in the partial sums.
  const double u = rng.uniform() * scheme.cumulative_.back();
  auto it = std::upper_bound(scheme.cumulative_.begin(), scheme.cumulative_.end(), u);
  auto i = static_cast<std::size_t>(it - scheme.cumulative_.begin());
  if (i >= n) i = n - 1;
  while (scheme.probs_[i] == 0.0 && i > 0) --i;
  return i;
}

Vector embed_block(const BlockLayout& layout, const Vector& base, int j, const Vector& y) {
  layout.check(base, "base");
  if (y.size() != layout.block_dim(j)) {
    throw DimensionMismatch("block " + std::to_string(j + 1) + " has dimension " +
                            std::to_string(layout.block_dim(j)) + ", got " +
                            std::to_string(y.size()));
  }
  Vector out = base;
  layout.block(out, j) = y;
  return out;
}

Vector extract_block(const BlockLayout& layout, const Vector& x, int j) {
  layout.check(x);
  return layout.block(x, j);
}

}  // namespace randblock
