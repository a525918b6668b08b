#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/levels.hpp"

namespace asymcs {

// Index set Omega as a mask over the (linearized) index grid of the sensing
// operator's output. Measurements are always ordered by increasing index.
struct SamplingMap {
  Shape shape;
  std::vector<bool> mask;
  Index m = 0;
  std::uint64_t seed = 0;
  std::string scheme;
  std::vector<std::pair<std::string, double>> params;
  // Level decomposition: band/region label per grid index (-1 if none).
  std::vector<int> region;
  // Sum over regions of p_k A_k for the all-round scheme, else m / size.
  double predicted_fraction = 0;

  double fraction() const { return static_cast<double>(m) / static_cast<double>(mask.size()); }
  std::vector<Index> indices() const;
  // Number of sampled indices per region label (labels 0..max).
  std::vector<Index> sampled_per_region() const;
  std::vector<Index> population_per_region() const;
};

SamplingMap FullMap(const Shape& shape);
SamplingMap UniformMap(const Shape& shape, Index m, std::uint64_t seed);

// Fully samples the first `first_level_count` indices of `order` (default:
// linear index order) and spends the rest of round(fraction * size) uniformly
// on the remaining indices.
SamplingMap HalfHalfMap(const Shape& shape, double fraction, Index first_level_count,
                        std::uint64_t seed, const std::vector<Index>& order = {});

// Orders an n x n grid by square shells max(row, col), then row, then column:
// the first k^2 entries are the leading k x k block (low sequency first).
std::vector<Index> SquareShellOrder(Index n);

// Independent uniform draws of m_k indices inside each band [N_{k-1}, N_k) of
// the linear index order.
SamplingMap MultilevelMap(const Shape& shape, const LevelStructure& levels,
                          const std::vector<Index>& counts, std::uint64_t seed);

// Concentric-region scheme on a centered n x n frequency grid normalized to
// [-1, 1]^2. n_regions regions: a disc of radius m_radius, annuli with radii
// r_k = m_radius + k (1 - m_radius) / (n_regions - 1), k = 1..n_regions-2, and
// the rest of the square. Region k is sampled uniformly at rate
// p_k = exp(-(b k / n_regions)^a).
struct AllRoundSpec {
  int n_regions = 50;
  double m_radius = 0.08;
  double a = 2.0;
  double b = 1.0;
};

void ValidateAllRoundSpec(const AllRoundSpec& spec);
double AllRoundRadius(const AllRoundSpec& spec, int k);
double AllRoundRate(const AllRoundSpec& spec, int k);
// Normalized area of region k inside [-1, 1]^2.
double AllRoundArea(const AllRoundSpec& spec, int k);
// sum_k p_k A_k.
double AllRoundPredictedFraction(const AllRoundSpec& spec);

// Region label of centered grid point (row, col) of an n x n grid (DC at
// (n/2, n/2)).
int AllRoundRegion(const AllRoundSpec& spec, Index n, Index row, Index col);

// 2D maps are over the centered grid; 1D maps use the same radii on the
// centered line [-1, 1] (region areas then become interval lengths).
SamplingMap AllRoundMap(const Shape& shape, const AllRoundSpec& spec, std::uint64_t seed);
double AllRoundPredictedFraction1D(const AllRoundSpec& spec);

// Finds b such that the predicted fraction matches target within 1e-4
// (bisection). target = 1 returns b = 0.
double CalibrateFraction(AllRoundSpec spec, double target, bool one_dimensional = false);

// Moves a centered-frequency map onto the sequency Hadamard grid (DC at
// (0, 0)). Both grids are ranked by radius from their DC point (ties by
// index) and the mask is carried rank for rank, so every region keeps its
// population and its sample count, and the innermost point lands on (0, 0).
SamplingMap HadamardOrderingAdapter(const SamplingMap& centered);

// Ensures `index` is sampled without changing m: if absent, it replaces a
// seeded random sampled index from the highest region (or any index).
SamplingMap ForceIndex(const SamplingMap& map, Index index);

// Bit-exact mask as PBM plus a JSON sidecar at path + ".json".
void SaveMap(const std::string& pbm_path, const SamplingMap& map);
SamplingMap LoadMap(const std::string& pbm_path);

}  // namespace asymcs
