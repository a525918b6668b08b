#include "asymcs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include <json.hpp>

#include "asymcs/imageio.hpp"

namespace asymcs {
namespace {

using json = nlohmann::ordered_json;

void Fill(SamplingMap& map, const std::vector<Index>& chosen) {
  for (Index i : chosen) map.mask[i] = true;
  map.m = std::count(map.mask.begin(), map.mask.end(), true);
}

SamplingMap Empty(const Shape& shape, std::string scheme, std::uint64_t seed) {
  ValidateShape(shape);
  SamplingMap map;
  map.shape = shape;
  map.mask.assign(static_cast<size_t>(shape.size()), false);
  map.seed = seed;
  map.scheme = std::move(scheme);
  return map;
}

// First k entries of a seeded shuffle of `pool`.
std::vector<Index> Draw(std::vector<Index> pool, Index k, std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<size_t>(k));
  return pool;
}

int RegionOfRadius(const AllRoundSpec& spec, double rho) {
  for (int k = 0; k + 1 < spec.n_regions; ++k)
    if (rho <= AllRoundRadius(spec, k)) return k;
  return spec.n_regions - 1;
}

double CenteredCoord(Index c, Index n) {
  return static_cast<double>(c - n / 2) / static_cast<double>(n / 2);
}

}  // namespace

std::vector<Index> SamplingMap::indices() const {
  std::vector<Index> idx;
  idx.reserve(static_cast<size_t>(m));
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(static_cast<Index>(i));
  return idx;
}

std::vector<Index> SamplingMap::sampled_per_region() const {
  int top = -1;
  for (int r : region) top = std::max(top, r);
  std::vector<Index> c(static_cast<size_t>(top + 1), 0);
  for (size_t i = 0; i < region.size(); ++i)
    if (region[i] >= 0 && mask[i]) ++c[region[i]];
  return c;
}

std::vector<Index> SamplingMap::population_per_region() const {
  int top = -1;
  for (int r : region) top = std::max(top, r);
  std::vector<Index> c(static_cast<size_t>(top + 1), 0);
  for (int r : region)
    if (r >= 0) ++c[r];
  return c;
}

SamplingMap FullMap(const Shape& shape) {
  SamplingMap map = Empty(shape, "full", 0);
  std::fill(map.mask.begin(), map.mask.end(), true);
  map.m = shape.size();
  map.predicted_fraction = 1.0;
  return map;
}

SamplingMap UniformMap(const Shape& shape, Index m, std::uint64_t seed) {
  SamplingMap map = Empty(shape, "uniform", seed);
  if (m < 0 || m > shape.size()) {
    throw Error(ErrorCode::kInvalidArgument, "m",
                std::to_string(m) + " samples do not fit in " + std::to_string(shape.size()));
  }
  std::vector<Index> pool(static_cast<size_t>(shape.size()));
  std::iota(pool.begin(), pool.end(), 0);
  std::mt19937_64 rng(seed);
  Fill(map, Draw(std::move(pool), m, rng));
  map.params = {{"m", static_cast<double>(m)}};
  map.predicted_fraction = map.fraction();
  return map;
}

std::vector<Index> SquareShellOrder(Index n) {
  std::vector<Index> order(static_cast<size_t>(n * n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [n](Index x, Index y) {
    return std::max(x / n, x % n) < std::max(y / n, y % n);
  });
  return order;
}

SamplingMap HalfHalfMap(const Shape& shape, double fraction, Index first_level_count,
                        std::uint64_t seed, const std::vector<Index>& order) {
  SamplingMap map = Empty(shape, "half_half", seed);
  const Index total = shape.size();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fraction", "must lie in (0, 1]");
  }
  const Index budget = static_cast<Index>(std::llround(fraction * static_cast<double>(total)));
  if (first_level_count < 0 || first_level_count > budget) {
    throw Error(ErrorCode::kInvalidArgument, "first_level_count",
                "first level of " + std::to_string(first_level_count) +
                    " exceeds the budget of " + std::to_string(budget));
  }
  std::vector<Index> ord = order;
  if (ord.empty()) {
    ord.resize(static_cast<size_t>(total));
    std::iota(ord.begin(), ord.end(), 0);
  }
  if (static_cast<Index>(ord.size()) != total) {
    throw Error(ErrorCode::kInvalidArgument, "order", "must be a permutation of the grid");
  }
  map.region.assign(static_cast<size_t>(total), 1);
  std::vector<Index> chosen(ord.begin(), ord.begin() + first_level_count);
  for (Index i : chosen) map.region[i] = 0;
  std::vector<Index> rest(ord.begin() + first_level_count, ord.end());
  std::mt19937_64 rng(seed);
  const std::vector<Index> tail = Draw(std::move(rest), budget - first_level_count, rng);
  chosen.insert(chosen.end(), tail.begin(), tail.end());
  Fill(map, chosen);
  map.params = {{"fraction", fraction}, {"first_level_count", static_cast<double>(first_level_count)}};
  map.predicted_fraction = map.fraction();
  return map;
}

SamplingMap MultilevelMap(const Shape& shape, const LevelStructure& levels,
                          const std::vector<Index>& counts, std::uint64_t seed) {
  SamplingMap map = Empty(shape, "multilevel", seed);
  if (levels.total() != shape.size()) {
    throw Error(ErrorCode::kInvalidArgument, "levels", "levels must end at the grid size");
  }
  if (static_cast<int>(counts.size()) != levels.count()) {
    throw Error(ErrorCode::kInvalidArgument, "counts", "one count per level required");
  }
  map.region.assign(static_cast<size_t>(shape.size()), -1);
  std::mt19937_64 rng(seed);
  std::vector<Index> chosen;
  for (int k = 0; k < levels.count(); ++k) {
    if (counts[k] < 0 || counts[k] > levels.width(k)) {
      throw Error(ErrorCode::kInvalidArgument, "counts",
                  "level " + std::to_string(k) + " asks for " + std::to_string(counts[k]) +
                      " of " + std::to_string(levels.width(k)) + " indices");
    }
    std::vector<Index> pool(static_cast<size_t>(levels.width(k)));
    std::iota(pool.begin(), pool.end(), levels.begin(k));
    for (Index i : pool) map.region[i] = k;
    const std::vector<Index> got = Draw(std::move(pool), counts[k], rng);
    chosen.insert(chosen.end(), got.begin(), got.end());
    map.params.emplace_back("N" + std::to_string(k + 1), static_cast<double>(levels.end(k)));
    map.params.emplace_back("m" + std::to_string(k + 1), static_cast<double>(counts[k]));
  }
  Fill(map, chosen);
  map.predicted_fraction = map.fraction();
  return map;
}

void ValidateAllRoundSpec(const AllRoundSpec& spec) {
  if (spec.n_regions < 2) throw Error(ErrorCode::kInvalidArgument, "n_regions", "must be >= 2");
  if (!(spec.m_radius > 0.0 && spec.m_radius < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "m_radius", "must lie in (0, 1)");
  }
  if (!(spec.a > 0.0)) throw Error(ErrorCode::kInvalidArgument, "a", "must be > 0");
  if (!(spec.b >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "b", "must be >= 0");
}

double AllRoundRadius(const AllRoundSpec& spec, int k) {
  return spec.m_radius + k * (1.0 - spec.m_radius) / (spec.n_regions - 1);
}

double AllRoundRate(const AllRoundSpec& spec, int k) {
  if (k == 0 || spec.b == 0.0) return 1.0;
  return std::exp(-std::pow(spec.b * k / spec.n_regions, spec.a));
}

double AllRoundArea(const AllRoundSpec& spec, int k) {
  const auto disc = [](double r) { return std::numbers::pi * r * r / 4.0; };
  if (k == 0) return disc(AllRoundRadius(spec, 0));
  if (k == spec.n_regions - 1) return 1.0 - disc(AllRoundRadius(spec, k - 1));
  return disc(AllRoundRadius(spec, k)) - disc(AllRoundRadius(spec, k - 1));
}

double AllRoundPredictedFraction(const AllRoundSpec& spec) {
  ValidateAllRoundSpec(spec);
  double p = 0.0;
  for (int k = 0; k < spec.n_regions; ++k) p += AllRoundRate(spec, k) * AllRoundArea(spec, k);
  return p;
}

double AllRoundPredictedFraction1D(const AllRoundSpec& spec) {
  ValidateAllRoundSpec(spec);
  double p = 0.0;
  for (int k = 0; k < spec.n_regions; ++k) {
    const double hi = k == spec.n_regions - 1 ? 1.0 : AllRoundRadius(spec, k);
    const double lo = k == 0 ? 0.0 : AllRoundRadius(spec, k - 1);
    p += AllRoundRate(spec, k) * (hi - lo);
  }
  return p;
}

int AllRoundRegion(const AllRoundSpec& spec, Index n, Index row, Index col) {
  const double x = CenteredCoord(col, n), y = CenteredCoord(row, n);
  return RegionOfRadius(spec, std::hypot(x, y));
}

SamplingMap AllRoundMap(const Shape& shape, const AllRoundSpec& spec, std::uint64_t seed) {
  ValidateAllRoundSpec(spec);
  SamplingMap map = Empty(shape, "all_round", seed);
  const Index n = shape.n;
  map.region.assign(static_cast<size_t>(shape.size()), 0);
  std::vector<std::vector<Index>> members(static_cast<size_t>(spec.n_regions));
  for (Index i = 0; i < shape.size(); ++i) {
    const int k = shape.rank == 2 ? AllRoundRegion(spec, n, i / n, i % n)
                                  : RegionOfRadius(spec, std::abs(CenteredCoord(i, n)));
    map.region[i] = k;
    members[k].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<Index> chosen;
  for (int k = 0; k < spec.n_regions; ++k) {
    const Index pop = static_cast<Index>(members[k].size());
    const Index take = std::min<Index>(
        pop, static_cast<Index>(std::llround(AllRoundRate(spec, k) * static_cast<double>(pop))));
    const std::vector<Index> got = Draw(members[k], take, rng);
    chosen.insert(chosen.end(), got.begin(), got.end());
  }
  Fill(map, chosen);
  map.params = {{"n_regions", static_cast<double>(spec.n_regions)},
                {"m_radius", spec.m_radius},
                {"a", spec.a},
                {"b", spec.b}};
  map.predicted_fraction = shape.rank == 2 ? AllRoundPredictedFraction(spec)
                                           : AllRoundPredictedFraction1D(spec);
  return map;
}

double CalibrateFraction(AllRoundSpec spec, double target, bool one_dimensional) {
  spec.b = 0.0;
  ValidateAllRoundSpec(spec);
  const auto predict = [&](double b) {
    spec.b = b;
    return one_dimensional ? AllRoundPredictedFraction1D(spec) : AllRoundPredictedFraction(spec);
  };
  if (!(target > 0.0 && target <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "target", "fraction must lie in (0, 1]");
  }
  if (target == 1.0) return 0.0;
  const double floor = one_dimensional ? spec.m_radius : AllRoundArea(spec, 0);
  if (target <= floor) {
    throw Error(ErrorCode::kInfeasible, "target",
                "fraction " + std::to_string(target) +
                    " is not above the fully sampled inner region area " + std::to_string(floor));
  }
  double lo = 0.0, hi = 1.0;
  while (predict(hi) > target) {
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorCode::kInfeasible, "target", "calibration diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (predict(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SamplingMap HadamardOrderingAdapter(const SamplingMap& centered) {
  if (centered.shape.rank != 2) {
    throw Error(ErrorCode::kInvalidShape, "map", "adapter expects a 2D map");
  }
  const Index n = centered.shape.n, total = centered.shape.size();
  std::vector<double> rc(static_cast<size_t>(total)), rh(static_cast<size_t>(total));
  for (Index i = 0; i < total; ++i) {
    rc[i] = std::hypot(CenteredCoord(i / n, n), CenteredCoord(i % n, n));
    rh[i] = std::hypot(static_cast<double>(i / n), static_cast<double>(i % n)) / (n / 2);
  }
  auto ranked = [&](const std::vector<double>& r) {
    std::vector<Index> ord(static_cast<size_t>(total));
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](Index x, Index y) { return r[x] < r[y]; });
    return ord;
  };
  const std::vector<Index> oc = ranked(rc), oh = ranked(rh);
  SamplingMap out = centered;
  out.scheme = centered.scheme + "+sequency";
  for (Index t = 0; t < total; ++t) {
    out.mask[oh[t]] = centered.mask[oc[t]];
    if (!centered.region.empty()) out.region[oh[t]] = centered.region[oc[t]];
  }
  return out;
}

SamplingMap ForceIndex(const SamplingMap& map, Index index) {
  if (index < 0 || index >= static_cast<Index>(map.mask.size())) {
    throw Error(ErrorCode::kOutOfRange, "index", "outside the sampling grid");
  }
  if (map.mask[index]) return map;
  SamplingMap out = map;
  out.mask[index] = true;
  if (map.m > 0) {
    std::vector<Index> cand = map.indices();
    if (!map.region.empty()) {
      int top = -1;
      for (Index i : cand) top = std::max(top, map.region[i]);
      std::vector<Index> outer;
      for (Index i : cand)
        if (map.region[i] == top) outer.push_back(i);
      cand = outer;
    }
    std::mt19937_64 rng(map.seed ^ 0x6a09e667f3bcc909ull);
    std::uniform_int_distribution<size_t> pick(0, cand.size() - 1);
    out.mask[cand[pick(rng)]] = false;
  } else {
    out.m = 1;
  }
  return out;
}

void SaveMap(const std::string& pbm_path, const SamplingMap& map) {
  const Index rows = map.shape.rank == 2 ? map.shape.n : 1;
  SavePbm(pbm_path, rows, map.shape.n, map.mask);
  json j;
  j["scheme"] = map.scheme;
  j["rank"] = map.shape.rank;
  j["n"] = map.shape.n;
  j["m"] = map.m;
  j["seed"] = map.seed;
  j["achieved_fraction"] = map.fraction();
  j["predicted_fraction"] = map.predicted_fraction;
  json params = json::object();
  for (const auto& [k, v] : map.params) params[k] = v;
  j["params"] = params;
  j["region"] = map.region;
  std::ofstream out(pbm_path + ".json");
  if (!out) throw Error(ErrorCode::kIo, pbm_path + ".json", "cannot open for writing");
  out << j.dump(2) << "\n";
}

SamplingMap LoadMap(const std::string& pbm_path) {
  Index rows = 0, cols = 0;
  std::vector<bool> bits = LoadPbm(pbm_path, &rows, &cols);
  std::ifstream in(pbm_path + ".json");
  if (!in) throw Error(ErrorCode::kIo, pbm_path + ".json", "missing sidecar");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, pbm_path + ".json", e.what());
  }
  SamplingMap map;
  map.shape = Shape{j.at("rank").get<int>(), j.at("n").get<Index>()};
  if (map.shape.size() != rows * cols) {
    throw Error(ErrorCode::kIo, pbm_path, "bitmap size disagrees with sidecar shape");
  }
  map.mask = std::move(bits);
  map.m = std::count(map.mask.begin(), map.mask.end(), true);
  map.seed = j.at("seed").get<std::uint64_t>();
  map.scheme = j.at("scheme").get<std::string>();
  map.predicted_fraction = j.at("predicted_fraction").get<double>();
  for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
    map.params.emplace_back(it.key(), it.value().get<double>());
  map.region = j.at("region").get<std::vector<int>>();
  return map;
}

}  // namespace asymcs
