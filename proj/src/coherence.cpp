#include "asymcs/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "asymcs/imageio.hpp"

namespace asymcs {
namespace {

Vec Canonical(Index n, Index j) {
  Vec e = Vec::Zero(n);
  e[j] = 1.0;
  return e;
}

void CheckLevels(const Operator& u, const LevelStructure& n_levels,
                 const LevelStructure& m_levels) {
  if (n_levels.total() != u.rows()) {
    throw Error(ErrorCode::kInvalidShape, "n_levels",
                "sampling levels end at " + std::to_string(n_levels.total()) +
                    " but the operator has " + std::to_string(u.rows()) + " rows");
  }
  if (m_levels.total() != u.cols()) {
    throw Error(ErrorCode::kInvalidShape, "m_levels",
                "sparsity levels end at " + std::to_string(m_levels.total()) +
                    " but the operator has " + std::to_string(u.cols()) + " columns");
  }
}

// Dense U, column by column.
CMat Columns(const Operator& u) {
  CMat m(u.rows(), u.cols());
  ParallelFor(u.cols(), [&](Index j) { m.col(j) = u.apply(Canonical(u.cols(), j)); });
  return m;
}

}  // namespace

Complex Entry(const Operator& u, Index i, Index j) {
  if (i < 0 || i >= u.rows()) {
    throw Error(ErrorCode::kOutOfRange, "i", "row index " + std::to_string(i) + " out of range");
  }
  if (j < 0 || j >= u.cols()) {
    throw Error(ErrorCode::kOutOfRange, "j", "column index " + std::to_string(j) + " out of range");
  }
  return u.apply(Canonical(u.cols(), j))[i];
}

CoherenceProfile ComputeCoherenceProfile(
    const Operator& u, const std::optional<LevelStructure>& n_levels,
    const std::optional<LevelStructure>& m_levels) {
  const bool banded = n_levels.has_value() && m_levels.has_value();
  if (banded) CheckLevels(u, *n_levels, *m_levels);
  const Index rows = u.rows(), cols = u.cols();
  // Each column is processed independently; the per-column results are
  // reduced afterwards in index order (max is order independent anyway).
  std::vector<RVec> per_col_band(banded ? cols : 0);
  RVec col_max(cols);
  // Row maxima are reduced over chunks of columns to bound memory.
  const Index chunk = std::max<Index>(1, cols / std::max(1, ThreadCount()));
  const Index chunks = (cols + chunk - 1) / chunk;
  std::vector<RVec> row_partial(chunks, RVec::Zero(rows));
  ParallelFor(chunks, [&](Index c) {
    RVec& rmax = row_partial[c];
    for (Index j = c * chunk; j < std::min(cols, (c + 1) * chunk); ++j) {
      const Vec col = u.apply(Canonical(cols, j));
      const RVec sq = col.cwiseAbs2();
      col_max[j] = sq.maxCoeff();
      rmax = rmax.cwiseMax(sq);
      if (banded) {
        RVec bands(n_levels->count());
        for (int k = 0; k < n_levels->count(); ++k)
          bands[k] = sq.segment(n_levels->begin(k), n_levels->width(k)).maxCoeff();
        per_col_band[j] = bands;
      }
    }
  });
  CoherenceProfile p;
  p.row_max = RVec::Zero(rows);
  for (const RVec& r : row_partial) p.row_max = p.row_max.cwiseMax(r);
  p.col_max = col_max;
  if (banded) {
    p.block = RMat::Zero(n_levels->count(), m_levels->count());
    for (Index j = 0; j < cols; ++j) {
      const int l = m_levels->band_of(j);
      p.block.col(l) = p.block.col(l).cwiseMax(per_col_band[j]);
    }
  }
  return p;
}

double GlobalCoherence(const Operator& u) {
  return ComputeCoherenceProfile(u).col_max.maxCoeff();
}

RMat LocalCoherenceFromProfile(const CoherenceProfile& profile,
                               const LevelStructure& n_levels) {
  RMat local(profile.block.rows(), profile.block.cols());
  for (int k = 0; k < n_levels.count(); ++k) {
    const double band = profile.row_max.segment(n_levels.begin(k), n_levels.width(k)).maxCoeff();
    for (Index l = 0; l < local.cols(); ++l)
      local(k, l) = std::sqrt(profile.block(k, l) * band);
  }
  return local;
}

RMat LocalCoherence(const Operator& u, const LevelStructure& n_levels,
                    const LevelStructure& m_levels) {
  return LocalCoherenceFromProfile(ComputeCoherenceProfile(u, n_levels, m_levels),
                                   n_levels);
}

TailCurves TailFromProfile(const CoherenceProfile& profile,
                           const std::vector<Index>& k_grid) {
  TailCurves t;
  const Index rows = profile.row_max.size(), cols = profile.col_max.size();
  for (Index k : k_grid) {
    if (k < 0 || k >= std::min(rows, cols)) {
      throw Error(ErrorCode::kOutOfRange, "k_grid",
                  "K = " + std::to_string(k) + " must lie in [0, N)");
    }
    t.k.push_back(k);
    t.row.push_back(profile.row_max.tail(rows - k).maxCoeff());
    t.col.push_back(profile.col_max.tail(cols - k).maxCoeff());
  }
  return t;
}

TailCurves TailCoherence(const Operator& u, const std::vector<Index>& k_grid) {
  return TailFromProfile(ComputeCoherenceProfile(u), k_grid);
}

AsymptoticTail AsymptoticTailCoherence(
    const std::function<Operator(Index)>& family, const std::vector<Index>& ns,
    double c) {
  if (!(c >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "c", "must be >= 1");
  AsymptoticTail out;
  for (Index n : ns) {
    const Operator u = family(n);
    const Index k = std::min<Index>(u.rows() - 1,
                                    static_cast<Index>(std::floor(u.rows() / c)));
    const TailCurves t = TailCoherence(u, {k});
    out.n.push_back(n);
    out.row.push_back(t.row[0]);
    out.col.push_back(t.col[0]);
  }
  return out;
}

CoherenceReport AnalyzeCoherence(const Operator& u,
                                 const LevelStructure& n_levels,
                                 const LevelStructure& m_levels,
                                 const std::vector<Index>& k_grid) {
  const CoherenceProfile p = ComputeCoherenceProfile(u, n_levels, m_levels);
  CoherenceReport r;
  r.global = p.col_max.maxCoeff();
  r.local = LocalCoherenceFromProfile(p, n_levels);
  r.tail = TailFromProfile(p, k_grid);
  return r;
}

namespace {

std::vector<Complex> PhaseGrid(bool real) {
  if (real) return {Complex(1, 0), Complex(-1, 0)};
  std::vector<Complex> g;
  for (int q = 0; q < 8; ++q) g.push_back(std::polar(1.0, q * std::numbers::pi / 4));
  return g;
}

// Calls visit(indices) for every size-k subset of [lo, hi).
void ForEachSubset(Index lo, Index hi, Index k, std::vector<Index>& cur,
                   const std::function<void()>& visit) {
  if (k == 0) {
    visit();
    return;
  }
  for (Index i = lo; i + k <= hi; ++i) {
    cur.push_back(i);
    ForEachSubset(i + 1, hi, k - 1, cur, visit);
    cur.pop_back();
  }
}

double ExactMax(const CMat& band, const LevelStructure& m_levels,
                const std::vector<Index>& s, const std::vector<Complex>& grid) {
  const Index total = std::accumulate(s.begin(), s.end(), Index{0});
  if (total == 0) return 0.0;
  double best = 0.0;
  std::vector<Index> support;
  std::function<void(int)> level = [&](int l) {
    if (l == m_levels.count()) {
      // The objective is invariant under a global phase, so the first phase
      // is fixed to 1.
      std::vector<size_t> idx(support.size(), 0);
      const Vec base = band.col(support[0]);
      while (true) {
        Vec v = base;
        for (size_t i = 1; i < support.size(); ++i) v += band.col(support[i]) * grid[idx[i]];
        best = std::max(best, v.squaredNorm());
        size_t pos = 1;
        while (pos < idx.size() && ++idx[pos] == grid.size()) idx[pos++] = 0;
        if (pos >= idx.size()) break;
      }
      return;
    }
    const Index before = static_cast<Index>(support.size());
    std::vector<Index> cur;
    ForEachSubset(m_levels.begin(l), m_levels.end(l), s[l], cur, [&] {
      support.resize(before);
      support.insert(support.end(), cur.begin(), cur.end());
      level(l + 1);
    });
    support.resize(before);
  };
  level(0);
  return best;
}

double GreedyMax(const CMat& band, const LevelStructure& m_levels,
                 const std::vector<Index>& s, const std::vector<Complex>& grid,
                 int restarts, std::mt19937_64& rng) {
  const Index total = std::accumulate(s.begin(), s.end(), Index{0});
  if (total == 0) return 0.0;
  double best = 0.0;
  std::uniform_int_distribution<size_t> pick_phase(0, grid.size() - 1);
  for (int rep = 0; rep < restarts; ++rep) {
    std::vector<Index> support;
    std::vector<int> level_of;
    std::vector<Complex> phases;
    for (int l = 0; l < m_levels.count(); ++l) {
      std::vector<Index> pool(static_cast<size_t>(m_levels.width(l)));
      std::iota(pool.begin(), pool.end(), m_levels.begin(l));
      std::shuffle(pool.begin(), pool.end(), rng);
      for (Index t = 0; t < s[l]; ++t) {
        support.push_back(pool[t]);
        level_of.push_back(l);
        phases.push_back(grid[pick_phase(rng)]);
      }
    }
    Vec v = Vec::Zero(band.rows());
    for (size_t i = 0; i < support.size(); ++i) v += band.col(support[i]) * phases[i];
    double value = v.squaredNorm();
    // Coordinate ascent: move one support entry within its level or change
    // its phase, taking the best single move, until nothing improves.
    for (bool improved = true; improved;) {
      improved = false;
      for (size_t i = 0; i < support.size(); ++i) {
        const int l = level_of[i];
        const Vec without = v - band.col(support[i]) * phases[i];
        Index best_q = support[i];
        Complex best_ph = phases[i];
        double best_val = value;
        for (Index q = m_levels.begin(l); q < m_levels.end(l); ++q) {
          if (q != support[i] &&
              std::find(support.begin(), support.end(), q) != support.end())
            continue;
          for (const Complex& ph : grid) {
            const double val = (without + band.col(q) * ph).squaredNorm();
            if (val > best_val * (1 + 1e-14) + 1e-300) {
              best_val = val;
              best_q = q;
              best_ph = ph;
            }
          }
        }
        if (best_q != support[i] || best_ph != phases[i]) {
          support[i] = best_q;
          phases[i] = best_ph;
          v = without + band.col(best_q) * best_ph;
          value = v.squaredNorm();
          improved = true;
        }
      }
    }
    best = std::max(best, value);
  }
  return best;
}

}  // namespace

RelativeSparsityResult RelativeSparsity(const Operator& u,
                                        const LevelStructure& n_levels,
                                        const LevelStructure& m_levels,
                                        const std::vector<Index>& s,
                                        SearchMode mode, int restarts,
                                        std::uint64_t seed) {
  CheckLevels(u, n_levels, m_levels);
  if (static_cast<int>(s.size()) != m_levels.count()) {
    throw Error(ErrorCode::kInvalidArgument, "s", "one sparsity per level required");
  }
  for (int l = 0; l < m_levels.count(); ++l) {
    if (s[l] < 0 || s[l] > m_levels.width(l)) {
      throw Error(ErrorCode::kInvalidArgument, "s",
                  "s[" + std::to_string(l) + "] exceeds its level width");
    }
  }
  if (mode == SearchMode::kExact && u.cols() > kExactSparsityCap) {
    throw Error(ErrorCode::kInvalidArgument, "mode",
                "exact search is limited to dimension " + std::to_string(kExactSparsityCap));
  }
  if (restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts", "must be >= 1");
  const CMat full = Columns(u);
  const bool real = full.imag().cwiseAbs().maxCoeff() < 1e-14;
  const std::vector<Complex> grid = PhaseGrid(real);
  RelativeSparsityResult r;
  r.values = RVec::Zero(n_levels.count());
  r.lower_bound = mode == SearchMode::kGreedy;
  const double total = static_cast<double>(std::accumulate(s.begin(), s.end(), Index{0}));
  r.phase_net_slack = real ? 0.0 : 2.0 * std::sin(std::numbers::pi / 16) * std::sqrt(total);
  for (int k = 0; k < n_levels.count(); ++k) {
    const CMat band = full.middleRows(n_levels.begin(k), n_levels.width(k));
    if (mode == SearchMode::kExact) {
      r.values[k] = ExactMax(band, m_levels, s, grid);
    } else {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(k + 1));
      r.values[k] = GreedyMax(band, m_levels, s, grid, restarts, rng);
    }
  }
  return r;
}

SampleBound SampleBoundDiagnostic(const LevelStructure& n_levels,
                                  const LevelStructure& m_levels,
                                  const std::vector<Index>& s,
                                  const RMat& local, const RVec& relative) {
  const int r = n_levels.count();
  if (local.rows() != r || local.cols() != m_levels.count()) {
    throw Error(ErrorCode::kInvalidShape, "local", "must be (sampling levels) x (sparsity levels)");
  }
  if (static_cast<int>(s.size()) != m_levels.count()) {
    throw Error(ErrorCode::kInvalidArgument, "s", "one sparsity per level required");
  }
  if (relative.size() != r) {
    throw Error(ErrorCode::kInvalidArgument, "relative", "one S_k per sampling level required");
  }
  const double log_n = std::log(static_cast<double>(n_levels.total()));
  SampleBound b;
  b.hat_m = RVec(r);
  for (int k = 0; k < r; ++k) {
    double inner = 0.0;
    for (int l = 0; l < m_levels.count(); ++l) inner += local(k, l) * static_cast<double>(s[l]);
    const double need = std::ceil(static_cast<double>(n_levels.width(k)) * inner * log_n - 1e-9);
    const Index width = n_levels.width(k);
    const bool sat = need >= static_cast<double>(width);
    b.m.push_back(sat ? width : static_cast<Index>(std::max(0.0, need)));
    b.saturated.push_back(sat);
    b.hat_m[k] = static_cast<double>(b.m.back()) / log_n;
  }
  // Worst admissible s~ for each l: a fractional knapsack, filling the levels
  // with the largest coefficient first up to S_k, total at most sum(s).
  const double budget = static_cast<double>(std::accumulate(s.begin(), s.end(), Index{0}));
  b.worst_residual = RVec(m_levels.count());
  for (int l = 0; l < m_levels.count(); ++l) {
    std::vector<std::pair<double, int>> coef;
    for (int k = 0; k < r; ++k) {
      const double c = b.hat_m[k] > 0
                           ? (static_cast<double>(n_levels.width(k)) / b.hat_m[k] - 1.0) * local(k, l)
                           : (local(k, l) > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      coef.emplace_back(c, k);
    }
    std::sort(coef.begin(), coef.end(), std::greater<>());
    double left = budget, sum = 0.0;
    for (const auto& [c, k] : coef) {
      if (left <= 0 || c <= 0) break;
      const double take = std::min(left, relative[k]);
      if (take > 0) sum += c * take;
      left -= take;
    }
    b.worst_residual[l] = sum - 1.0;
  }
  return b;
}

RVec HatConditionResidual(const LevelStructure& n_levels, const RVec& hat_m,
                          const RMat& local, const RVec& s_tilde) {
  const int r = n_levels.count();
  if (hat_m.size() != r || s_tilde.size() != r || local.rows() != r) {
    throw Error(ErrorCode::kInvalidShape, "hat_m", "inconsistent level counts");
  }
  RVec res(local.cols());
  for (Index l = 0; l < local.cols(); ++l) {
    double sum = 0.0;
    for (int k = 0; k < r; ++k) {
      if (hat_m[k] <= 0) {
        throw Error(ErrorCode::kInvalidArgument, "hat_m", "entries must be positive");
      }
      sum += (static_cast<double>(n_levels.width(k)) / hat_m[k] - 1.0) * local(k, l) * s_tilde[k];
    }
    res[l] = sum - 1.0;
  }
  return res;
}

void WriteHeatmapPgm(const std::string& path, const RMat& values, double decades) {
  const double hi = values.cwiseAbs().maxCoeff();
  RMat gray = RMat::Zero(values.rows(), values.cols());
  if (hi > 0) {
    const double lo = hi * std::pow(10.0, -decades);
    for (Index i = 0; i < values.rows(); ++i)
      for (Index j = 0; j < values.cols(); ++j) {
        const double v = std::abs(values(i, j));
        gray(i, j) = v <= lo ? 0.0 : (std::log10(v) - std::log10(lo)) / decades;
      }
  }
  SavePgm(path, gray, 16);
}

void WriteMatrixCsv(const std::string& path, const RMat& values) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out.precision(17);
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    out << "\n";
  }
}

void WriteTailCsv(const std::string& path, const TailCurves& tail) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out.precision(17);
  out << "K,row_tail,col_tail\n";
  for (size_t i = 0; i < tail.k.size(); ++i)
    out << tail.k[i] << "," << tail.row[i] << "," << tail.col[i] << "\n";
}

}  // namespace asymcs
