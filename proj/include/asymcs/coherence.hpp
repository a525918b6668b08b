#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/levels.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// u_ij = e_i^T U e_j, obtained by applying U to the j-th canonical vector.
Complex Entry(const Operator& u, Index i, Index j);

// Row and column maxima of |u_ij|^2, gathered in one pass over the columns.
// Every coherence quantity below is a max over some rectangle of these, so a
// single pass serves them all. Columns are streamed concurrently; the result
// does not depend on the thread count.
struct CoherenceProfile {
  RVec row_max;  // max_j |u_ij|^2
  RVec col_max;  // max_i |u_ij|^2
  RMat block;    // max over band (k, l) when levels were supplied
};

CoherenceProfile ComputeCoherenceProfile(
    const Operator& u, const std::optional<LevelStructure>& n_levels = {},
    const std::optional<LevelStructure>& m_levels = {});

// mu(U) = max |u_ij|^2.
double GlobalCoherence(const Operator& u);

// mu_{N,M}(k, l) = sqrt(mu(P_k U P_l) * mu(P_k U)).
RMat LocalCoherence(const Operator& u, const LevelStructure& n_levels,
                    const LevelStructure& m_levels);
RMat LocalCoherenceFromProfile(const CoherenceProfile& profile,
                               const LevelStructure& n_levels);

// mu(P_K^perp U) (rows K.. onward) and mu(U P_K^perp) (columns K.. onward).
struct TailCurves {
  std::vector<Index> k;
  std::vector<double> row;
  std::vector<double> col;
};

TailCurves TailCoherence(const Operator& u, const std::vector<Index>& k_grid);
TailCurves TailFromProfile(const CoherenceProfile& profile,
                           const std::vector<Index>& k_grid);

// Asymptotic incoherence along a family U_N: for each N the tail coherences
// at K = N / c, so that N / K stays fixed at c.
struct AsymptoticTail {
  std::vector<Index> n;
  std::vector<double> row;
  std::vector<double> col;
};

AsymptoticTail AsymptoticTailCoherence(
    const std::function<Operator(Index)>& family, const std::vector<Index>& ns,
    double c = 2.0);

struct CoherenceReport {
  double global = 0;
  RMat local;
  TailCurves tail;
};

CoherenceReport AnalyzeCoherence(const Operator& u,
                                 const LevelStructure& n_levels,
                                 const LevelStructure& m_levels,
                                 const std::vector<Index>& k_grid);

enum class SearchMode { kExact, kGreedy };

// S_k = max over z with |z_i| <= 1 and exactly s_l nonzeros in sparsity band l
// of ‖P_k U z‖². The maximum of this convex function sits at |z_i| = 1, so the
// search runs over supports and unit phases: signs for real U, the 8th roots
// of unity for complex U.
struct RelativeSparsityResult {
  RVec values;
  // Greedy results are lower bounds on the true maximum.
  bool lower_bound = false;
  // For complex U the phase grid is an epsilon-net: the continuous maximum
  // satisfies sqrt(S_k) <= sqrt(values[k]) + phase_net_slack. Zero for real U.
  double phase_net_slack = 0;
};

inline constexpr Index kExactSparsityCap = 16;

RelativeSparsityResult RelativeSparsity(const Operator& u,
                                        const LevelStructure& n_levels,
                                        const LevelStructure& m_levels,
                                        const std::vector<Index>& s,
                                        SearchMode mode, int restarts = 1000,
                                        std::uint64_t seed = 0);

// Per-level sample counts from the sampling-in-levels bounds with every
// unspecified constant set to 1. A comparison aid between schemes, not a
// guarantee.
struct SampleBound {
  std::vector<Index> m;          // smallest m_k satisfying the level bound
  std::vector<bool> saturated;   // m_k clipped at the band width
  RVec hat_m;                    // m_k / log N
  RVec worst_residual;           // per l, max over admissible s~ minus 1
};

SampleBound SampleBoundDiagnostic(const LevelStructure& n_levels,
                                  const LevelStructure& m_levels,
                                  const std::vector<Index>& s,
                                  const RMat& local, const RVec& relative);

// sum_k (width_k / hat_m_k - 1) mu(k, l) s~_k - 1 for each l; <= 0 means the
// second condition holds for this s~.
RVec HatConditionResidual(const LevelStructure& n_levels, const RVec& hat_m,
                          const RMat& local, const RVec& s_tilde);

// Heatmap export. PGM values are log-scaled: v -> (log10 v - log10 lo) /
// (log10 hi - log10 lo) with hi = max entry and lo = hi * 10^-decades, zeros
// and anything below lo map to black.
void WriteHeatmapPgm(const std::string& path, const RMat& values,
                     double decades = 6.0);
void WriteMatrixCsv(const std::string& path, const RMat& values);
void WriteTailCsv(const std::string& path, const TailCurves& tail);

}  // namespace asymcs
