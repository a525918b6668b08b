#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "asymcs/experiments.hpp"
#include "asymcs/sampling.hpp"

using namespace asymcs;

namespace {

Index Count(const std::vector<bool>& mask) {
  Index c = 0;
  for (bool b : mask) c += b;
  return c;
}

}  // namespace

TEST_CASE("uniform and full maps") {
  const Shape s = Shape::D2(32);
  const SamplingMap a = UniformMap(s, 100, 7), b = UniformMap(s, 100, 7), c = UniformMap(s, 100, 8);
  CHECK(a.m == 100);
  CHECK(Count(a.mask) == 100);
  CHECK(a.mask == b.mask);
  CHECK(a.mask != c.mask);
  const std::vector<Index> idx = a.indices();
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(FullMap(s).m == 1024);
  CHECK_THROWS_AS(UniformMap(s, 2000, 1), Error);
}

TEST_CASE("half-half map fully samples the leading block") {
  const Index n = 16;
  const std::vector<Index> order = SquareShellOrder(n);
  // The first k^2 entries of the shell order form the leading k x k block.
  std::set<Index> block(order.begin(), order.begin() + 16);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 4; ++c) CHECK(block.count(r * n + c) == 1);
  const SamplingMap m = HalfHalfMap(Shape::D2(n), 0.25, 16, 3, order);
  CHECK(m.m == 64);
  for (Index i : block) CHECK(m.mask[i]);
  CHECK(m.sampled_per_region() == std::vector<Index>{16, 48});
  CHECK_THROWS_AS(HalfHalfMap(Shape::D2(n), 0.25, 65, 3), Error);
}

TEST_CASE("multilevel map draws the requested count per band") {
  const LevelStructure l({8, 32, 128});
  const SamplingMap m = MultilevelMap(Shape::D1(128), l, {8, 10, 5}, 2);
  CHECK(m.m == 23);
  CHECK(m.sampled_per_region() == std::vector<Index>{8, 10, 5});
  CHECK(m.population_per_region() == std::vector<Index>{8, 24, 96});
  CHECK_THROWS_AS(MultilevelMap(Shape::D1(128), l, {9, 0, 0}, 2), Error);
}

TEST_CASE("all-round radii, rates and areas") {
  const AllRoundSpec spec{50, 0.08, 2.0, 1.5};
  CHECK(AllRoundRadius(spec, 0) == doctest::Approx(0.08));
  CHECK(AllRoundRadius(spec, 49) == doctest::Approx(1.0));
  CHECK(AllRoundRate(spec, 0) == 1.0);
  CHECK(AllRoundRate(spec, 10) == doctest::Approx(std::exp(-std::pow(1.5 * 10 / 50.0, 2.0))));
  double total = 0;
  for (int k = 0; k < spec.n_regions; ++k) {
    CHECK(AllRoundArea(spec, k) > 0);
    if (k > 0) CHECK(AllRoundRate(spec, k) < AllRoundRate(spec, k - 1));
    total += AllRoundArea(spec, k);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // Inner disc: pi r^2 over the area 4 of [-1, 1]^2.
  CHECK(AllRoundArea(spec, 0) == doctest::Approx(std::numbers::pi * 0.0064 / 4));
  CHECK_THROWS_AS(ValidateAllRoundSpec({1, 0.08, 2, 1}), Error);
  CHECK_THROWS_AS(ValidateAllRoundSpec({50, 1.0, 2, 1}), Error);
}

TEST_CASE("all-round map: region populations follow the areas, fraction is calibrated") {
  const Index n = 256;
  AllRoundSpec spec;
  spec.b = CalibrateFraction(spec, 0.125);
  CHECK(AllRoundPredictedFraction(spec) == doctest::Approx(0.125).epsilon(1e-4));
  const SamplingMap m = AllRoundMap(Shape::D2(n), spec, 1);
  CHECK(std::abs(m.fraction() - 0.125) < 0.005);
  CHECK(m.predicted_fraction == doctest::Approx(0.125).epsilon(1e-4));
  const std::vector<Index> pop = m.population_per_region(), got = m.sampled_per_region();
  for (int k = 0; k < spec.n_regions; ++k) {
    // Pixel-count areas converge to the analytic ones.
    CHECK(std::abs(static_cast<double>(pop[k]) / (n * n) - AllRoundArea(spec, k)) < 2e-3);
    CHECK(got[k] == std::llround(AllRoundRate(spec, k) * static_cast<double>(pop[k])));
  }
  // DC sits in the fully sampled inner disc.
  CHECK(m.region[(n / 2) * n + n / 2] == 0);
  CHECK(m.mask[(n / 2) * n + n / 2]);
  CHECK(CalibrateFraction(spec, 1.0) == 0.0);
  CHECK_THROWS_AS(CalibrateFraction(spec, 0.001), Error);
}

TEST_CASE("all-round map in 1D") {
  AllRoundSpec spec{20, 0.02, 2.0, 1.0};
  spec.b = CalibrateFraction(spec, 0.06, true);
  CHECK(AllRoundPredictedFraction1D(spec) == doctest::Approx(0.06).epsilon(1e-4));
  const SamplingMap m = AllRoundMap(Shape::D1(1024), spec, 4);
  CHECK(std::abs(m.fraction() - 0.06) < 0.01);
  CHECK(m.mask[512]);
}

TEST_CASE("Hadamard adapter keeps region counts and puts the inner point on (0, 0)") {
  const Index n = 64;
  AllRoundSpec spec;
  spec.b = CalibrateFraction(spec, 0.1);
  const SamplingMap c = AllRoundMap(Shape::D2(n), spec, 9);
  const SamplingMap h = HadamardOrderingAdapter(c);
  CHECK(h.m == c.m);
  CHECK(Count(h.mask) == c.m);
  CHECK(h.sampled_per_region() == c.sampled_per_region());
  CHECK(h.population_per_region() == c.population_per_region());
  CHECK(h.mask[0]);
  CHECK(h.region[0] == 0);
}

TEST_CASE("force index keeps the count") {
  SamplingMap m = UniformMap(Shape::D1(64), 10, 1);
  Index missing = 0;
  while (m.mask[missing]) ++missing;
  const SamplingMap f = ForceIndex(m, missing);
  CHECK(f.mask[missing]);
  CHECK(Count(f.mask) == 10);
  CHECK(ForceIndex(f, missing).mask == f.mask);
  CHECK_THROWS_AS(ForceIndex(m, 64), Error);
}

TEST_CASE("map files round-trip bit-exactly") {
  const auto path = (std::filesystem::temp_directory_path() / "asymcs_map.pbm").string();
  AllRoundSpec spec;
  spec.b = CalibrateFraction(spec, 0.2);
  const SamplingMap m = AllRoundMap(Shape::D2(32), spec, 5);
  SaveMap(path, m);
  const SamplingMap r = LoadMap(path);
  CHECK(r.mask == m.mask);
  CHECK(r.m == m.m);
  CHECK(r.seed == m.seed);
  CHECK(r.shape == m.shape);
  CHECK(r.region == m.region);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("experiment maps") {
  const Index n = 32;
  const SamplingMap u = BuildMap(SensingKind::kDft, {MapScheme::kUniform, 0.25}, n, 1);
  CHECK(u.m == 256);
  const SamplingMap h = BuildMap(SensingKind::kHadamard, {MapScheme::kAllRound, 0.25}, n, 1);
  CHECK(h.mask[0]);
  const SamplingMap hh = BuildMap(SensingKind::kDft, {MapScheme::kHalfHalf, 0.25}, n, 1);
  CHECK(hh.m == 256);
  // The fully sampled half is the disc of the 128 lowest frequencies.
  const std::vector<Index> radial = CenteredRadialOrder(n);
  CHECK(radial[0] == (n / 2) * n + n / 2);
  for (Index t = 0; t < 128; ++t) CHECK(hh.mask[radial[t]]);
  CHECK(BuildMap(SensingKind::kDft, {MapScheme::kFull, 0.0}, n, 1).m == n * n);
  CHECK_THROWS_AS(BuildMap(SensingKind::kDft, {MapScheme::kUniform, 1.5}, n, 1), Error);
  CHECK_THROWS_AS(ParseMapScheme("spiral"), Error);
  CHECK(ParseMapScheme(ToString(MapScheme::kHalfHalf)) == MapScheme::kHalfHalf);
}
