// Independent brute-force references used by the test suites. Nothing here
// calls into the fast transform paths.
#pragma once

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "asymcs/core.hpp"

namespace asymcs::oracle {

inline Vec RandomVec(Index n, std::uint64_t seed, bool complex = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(g(rng), complex ? g(rng) : 0.0);
  return v;
}

inline CMat DftMatrix(Index n) {
  CMat m(n, n);
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j)
      m(k, j) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                          -2.0 * std::numbers::pi * static_cast<double>(k * j % n) / n);
  return m;
}

// Sylvester construction, natural (Hadamard) order, orthonormal.
inline RMat HadamardMatrix(Index n) {
  RMat h = RMat::Ones(1, 1);
  while (h.rows() < n) {
    const Index s = h.rows();
    RMat next(2 * s, 2 * s);
    next << h, h, h, -h;
    h = next;
  }
  return h / std::sqrt(static_cast<double>(n));
}

inline int SignChanges(const RMat& m, Index row) {
  int c = 0;
  for (Index j = 1; j < m.cols(); ++j)
    if ((m(row, j) > 0) != (m(row, j - 1) > 0)) ++c;
  return c;
}

inline CMat Kronecker(const CMat& a, const CMat& b) {
  CMat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline double MaxAbs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

// max |m_ij|^2 over a rectangle of a dense matrix.
inline double BlockMax(const CMat& m, Index r0, Index r1, Index c0, Index c1) {
  double best = 0;
  for (Index i = r0; i < r1; ++i)
    for (Index j = c0; j < c1; ++j) best = std::max(best, std::norm(m(i, j)));
  return best;
}

// Exhaustive S_k for one band of rows: every support with exactly s[l]
// entries inside [bounds[l-1], bounds[l]) and every phase from `phases` on
// each support entry.
inline double BruteRelativeSparsity(const CMat& band, const std::vector<Index>& bounds,
                                    const std::vector<Index>& s,
                                    const std::vector<Complex>& phases) {
  std::vector<Index> support;
  double best = 0;
  auto phase_search = [&]() {
    const size_t k = support.size();
    std::vector<size_t> digit(k, 0);
    while (true) {
      Vec acc = Vec::Zero(band.rows());
      for (size_t q = 0; q < k; ++q) acc += phases[digit[q]] * band.col(support[q]);
      best = std::max(best, acc.squaredNorm());
      size_t q = 0;
      while (q < k && ++digit[q] == phases.size()) digit[q++] = 0;
      if (q == k) break;
    }
  };
  std::function<void(size_t, Index, Index)> choose = [&](size_t level, Index from, Index left) {
    if (left == 0) {
      if (level + 1 == bounds.size()) {
        phase_search();
        return;
      }
      choose(level + 1, bounds[level], s[level + 1]);
      return;
    }
    for (Index i = from; i < bounds[level]; ++i) {
      support.push_back(i);
      choose(level, i + 1, left - 1);
      support.pop_back();
    }
  };
  choose(0, 0, s[0]);
  return best;
}

// Minimum-l1 solution of A z = y for real A (m x n, m < n): the optimum of
// the equivalent linear program sits on a basic solution, i.e. z supported on
// some m columns with A_S z_S = y. Enumerates every m-subset.
inline RVec BruteMinL1(const RMat& a, const RVec& y) {
  const Index m = a.rows(), n = a.cols();
  std::vector<Index> s(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) s[i] = i;
  double best = std::numeric_limits<double>::infinity();
  RVec arg = RVec::Zero(n);
  RMat sub(m, m);
  while (true) {
    for (Index q = 0; q < m; ++q) sub.col(q) = a.col(s[q]);
    Eigen::FullPivLU<RMat> lu(sub);
    if (lu.isInvertible()) {
      const RVec z = lu.solve(y);
      const double l1 = z.cwiseAbs().sum();
      if (l1 < best) {
        best = l1;
        arg.setZero();
        for (Index q = 0; q < m; ++q) arg[s[q]] = z[q];
      }
    }
    Index q = m - 1;
    while (q >= 0 && s[q] == n - m + q) --q;
    if (q < 0) break;
    ++s[q];
    for (Index t = q + 1; t < m; ++t) s[t] = s[t - 1] + 1;
  }
  return arg;
}

inline Vec SparseVec(Index n, int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  Vec x = Vec::Zero(n);
  for (int k = 0; k < s; ++k) x[idx[k]] = g(rng) + (g(rng) > 0 ? 1.0 : -1.0);
  return x;
}

}  // namespace asymcs::oracle
