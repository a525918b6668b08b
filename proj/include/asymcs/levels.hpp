#pragma once

#include <vector>

#include "asymcs/core.hpp"

namespace asymcs {

// Boundary vector (b_1, ..., b_r) partitioning {0, ..., b_r - 1} into the
// half-open bands [b_{k-1}, b_k) with b_0 = 0. Used both for sparsity levels
// (M) and for sampling levels (N).
class LevelStructure {
 public:
  LevelStructure() = default;
  explicit LevelStructure(std::vector<Index> boundaries);

  // Single band covering [0, total).
  static LevelStructure Single(Index total);
  // Dyadic bands ending at total: total/2^(r-1), ..., total/2, total.
  static LevelStructure Dyadic(Index total, int r);

  int count() const { return static_cast<int>(bounds_.size()); }
  Index total() const { return bounds_.empty() ? 0 : bounds_.back(); }
  Index begin(int k) const { return k == 0 ? 0 : bounds_[k - 1]; }
  Index end(int k) const { return bounds_[k]; }
  Index width(int k) const { return end(k) - begin(k); }
  // Band containing index i (0-based).
  int band_of(Index i) const;
  const std::vector<Index>& boundaries() const { return bounds_; }

  bool operator==(const LevelStructure&) const = default;

 private:
  std::vector<Index> bounds_;
};

}  // namespace asymcs
