#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "asymcs/coherence.hpp"
#include "asymcs/imageio.hpp"
#include "asymcs/transforms.hpp"
#include "oracles.hpp"

using namespace asymcs;

namespace {

Operator DftDwt(Index n, int order, int levels) {
  return Compose({DftOperator(Shape::D1(n)),
                  DwtOperator(Shape::D1(n), {order, levels, BoundaryMode::kPeriodic}).adjoint()});
}

Operator HadamardHaar(Index n, int levels) {
  return Compose({FwhtOperator(Shape::D1(n), HadamardOrdering::kSequency),
                  DwtOperator(Shape::D1(n), {1, levels, BoundaryMode::kPeriodic}).adjoint()});
}

std::vector<Complex> Phases(bool real) {
  if (real) return {Complex(1, 0), Complex(-1, 0)};
  std::vector<Complex> g;
  for (int q = 0; q < 8; ++q) g.push_back(std::polar(1.0, q * std::numbers::pi / 4));
  return g;
}

}  // namespace

TEST_CASE("global coherence of the DFT is 1/N and of dft * haar^-1 is 1") {
  for (Index n : {8, 64, 256}) {
    CHECK(GlobalCoherence(DftOperator(Shape::D1(n))) ==
          doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-12));
  }
  // The coarsest Haar scaling function is constant: it sees only DC.
  CHECK(GlobalCoherence(DftDwt(64, 1, 6)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entry reads one matrix element") {
  const Operator u = DftDwt(16, 2, 2);
  const CMat m = Materialize(u);
  for (Index i : {0, 5, 15})
    for (Index j : {0, 3, 12}) CHECK(std::abs(Entry(u, i, j) - m(i, j)) < 1e-14);
}

TEST_CASE("local coherence matches the materialized brute force") {
  for (Index n : {8, 16}) {
    const int r = Log2(n) - 1;
    for (const Operator& u : {DftDwt(n, 2, r), HadamardHaar(n, r), DftDwt(n, 1, Log2(n))}) {
      const LevelStructure nl = LevelStructure::Dyadic(n, 3);
      const LevelStructure ml = LevelStructure::Dyadic(n, 3);
      const RMat local = LocalCoherence(u, nl, ml);
      const CMat m = Materialize(u);
      for (int k = 0; k < nl.count(); ++k)
        for (int l = 0; l < ml.count(); ++l) {
          const double block = oracle::BlockMax(m, nl.begin(k), nl.end(k), ml.begin(l), ml.end(l));
          const double rows = oracle::BlockMax(m, nl.begin(k), nl.end(k), 0, n);
          CHECK(std::abs(local(k, l) - std::sqrt(block * rows)) < 1e-12);
        }
    }
  }
}

TEST_CASE("tail coherence matches the brute force and never increases") {
  const Index n = 32;
  const Operator u = DftDwt(n, 3, 3);
  const CMat m = Materialize(u);
  const std::vector<Index> ks = {0, 4, 8, 16, 24};
  const TailCurves t = TailCoherence(u, ks);
  for (size_t q = 0; q < ks.size(); ++q) {
    CHECK(std::abs(t.row[q] - oracle::BlockMax(m, ks[q], n, 0, n)) < 1e-14);
    CHECK(std::abs(t.col[q] - oracle::BlockMax(m, 0, n, ks[q], n)) < 1e-14);
    if (q > 0) {
      CHECK(t.row[q] <= t.row[q - 1]);
      CHECK(t.col[q] <= t.col[q - 1]);
    }
  }
  CHECK_THROWS_AS(TailCoherence(u, {n}), Error);
}

TEST_CASE("coherence profile does not depend on the thread count") {
  const Operator u = DftDwt(64, 4, 3);
  const int saved = ThreadCount();
  SetThreadCount(1);
  const CoherenceProfile a = ComputeCoherenceProfile(u);
  SetThreadCount(4);
  const CoherenceProfile b = ComputeCoherenceProfile(u);
  SetThreadCount(saved);
  CHECK(a.row_max == b.row_max);
  CHECK(a.col_max == b.col_max);
}

TEST_CASE("relative sparsity: exact search equals exhaustive enumeration") {
  struct Case {
    Operator u;
    std::vector<Index> s;
  };
  std::vector<Case> cases = {
      {HadamardHaar(8, 2), {1, 1, 1}},
      {DftDwt(8, 2, 1), {1, 1, 1}},
      {HadamardHaar(16, 3), {1, 1, 2}},
      {DftDwt(16, 1, 3), {1, 1, 1}},
  };
  for (const Case& c : cases) {
    const Index n = c.u.cols();
    const LevelStructure nl = LevelStructure::Dyadic(n, 3);
    const LevelStructure ml = LevelStructure::Dyadic(n, 3);
    const RelativeSparsityResult r = RelativeSparsity(c.u, nl, ml, c.s, SearchMode::kExact);
    const CMat m = Materialize(c.u);
    const bool real = m.imag().cwiseAbs().maxCoeff() < 1e-14;
    // A phase within pi/8 of the optimum moves each term by 2 sin(pi/16).
    const double total = static_cast<double>(c.s[0] + c.s[1] + c.s[2]);
    CHECK(r.phase_net_slack ==
          doctest::Approx(real ? 0.0 : 2 * std::sin(std::numbers::pi / 16) * std::sqrt(total)));
    for (int k = 0; k < nl.count(); ++k) {
      const CMat band = m.middleRows(nl.begin(k), nl.width(k));
      const double brute = oracle::BruteRelativeSparsity(band, ml.boundaries(), c.s, Phases(real));
      CHECK(std::abs(r.values[k] - brute) < 1e-12);
    }
  }
}

TEST_CASE("relative sparsity: greedy is a lower bound and usually exact") {
  int equal = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Operator u = RandomOrthogonal(8, seed);
    const LevelStructure levels({4, 8});
    std::mt19937_64 rng(seed);
    const std::vector<Index> s = {1 + static_cast<Index>(rng() % 2), 1 + static_cast<Index>(rng() % 3)};
    const RVec exact = RelativeSparsity(u, levels, levels, s, SearchMode::kExact).values;
    const RelativeSparsityResult g = RelativeSparsity(u, levels, levels, s, SearchMode::kGreedy, 200, seed);
    CHECK(g.lower_bound);
    CHECK((g.values.array() <= exact.array() + 1e-12).all());
    if ((g.values - exact).cwiseAbs().maxCoeff() < 1e-12) ++equal;
  }
  CHECK(equal >= 28);
}

TEST_CASE("relative sparsity validates its inputs") {
  const Operator u = HadamardHaar(8, 2);
  const LevelStructure l = LevelStructure::Dyadic(8, 2);
  CHECK_THROWS_AS(RelativeSparsity(u, l, l, {1}, SearchMode::kExact), Error);
  CHECK_THROWS_AS(RelativeSparsity(u, l, l, {5, 1}, SearchMode::kExact), Error);
  const Operator big = HadamardHaar(32, 2);
  const LevelStructure lb = LevelStructure::Dyadic(32, 2);
  CHECK_THROWS_AS(RelativeSparsity(big, lb, lb, {1, 1}, SearchMode::kExact), Error);
}

TEST_CASE("sample bound: saturates coherent levels, hat condition residual") {
  const Index n = 64;
  const Operator u = DftDwt(n, 2, 3);
  const LevelStructure nl = LevelStructure::Dyadic(n, 4);
  const LevelStructure ml = LevelStructure::Dyadic(n, 4);
  const RMat local = LocalCoherence(u, nl, ml);
  const std::vector<Index> s = {8, 4, 4, 4};
  const RVec rel = RVec::Constant(4, 4.0);
  const SampleBound b = SampleBoundDiagnostic(nl, ml, s, local, rel);
  REQUIRE(b.m.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(b.m[k] <= nl.width(k));
    CHECK(b.hat_m[k] == doctest::Approx(static_cast<double>(b.m[k]) / std::log(64.0)));
  }
  // The scaling band is fully coherent with the leading frequencies.
  CHECK(b.saturated[0]);
  const RVec res = HatConditionResidual(nl, b.hat_m, local, RVec::Ones(4));
  for (Index l = 0; l < 4; ++l) {
    double expect = -1.0;
    for (int k = 0; k < 4; ++k)
      expect += (static_cast<double>(nl.width(k)) / b.hat_m[k] - 1.0) * local(k, l);
    CHECK(res[l] == doctest::Approx(expect));
  }
}

TEST_CASE("heatmap and csv exports") {
  const auto dir = std::filesystem::temp_directory_path() / "asymcs_coherence_test";
  std::filesystem::create_directories(dir);
  RMat v(2, 3);
  v << 1, 1e-3, 0, 1e-7, 0.5, 1e-2;
  WriteHeatmapPgm((dir / "h.pgm").string(), v, 6.0);
  const RMat g = LoadPgm((dir / "h.pgm").string());
  REQUIRE(g.rows() == 2);
  REQUIRE(g.cols() == 3);
  CHECK(g(0, 0) == 1.0);                                  // the maximum
  CHECK(std::abs(g(0, 1) - 0.5) <= 1.0 / 65535);          // 3 of 6 decades
  CHECK(g(0, 2) == 0.0);                                  // zero
  CHECK(g(1, 0) == 0.0);                                  // below 6 decades
  WriteTailCsv((dir / "t.csv").string(), TailCurves{{0, 4}, {1.0, 0.5}, {1.0, 0.25}});
  std::ifstream t(dir / "t.csv");
  std::string header;
  std::getline(t, header);
  CHECK(header.find("row") != std::string::npos);
  std::filesystem::remove_all(dir);
}
