#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "asymcs/infdim.hpp"

using namespace asymcs;

namespace {

std::vector<Index> AllIndices(Index count) {
  std::vector<Index> v(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i) v[i] = i;
  return v;
}

// Exact squared L2 norm on [0, 1] of the piecewise-linear interpolant.
double InterpolantNormSquared(const RVec& v) {
  const double h = 1.0 / static_cast<double>(v.size() - 1);
  double s = 0;
  for (Index k = 0; k + 1 < v.size(); ++k) s += (v[k] * v[k] + v[k] * v[k + 1] + v[k + 1] * v[k + 1]);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("closed-form Fourier samples agree with adaptive quadrature") {
  for (const ContinuousTarget& f : {ConstantTarget(), ExpCos2Target(), RampTarget(),
                                    TrigTarget({{3, Complex(1, 0.5)}, {-2, Complex(0.25)}})}) {
    for (double w : {0.0, 0.5, -0.5, 5.0, -5.0}) {
      CAPTURE(f.id);
      CAPTURE(w);
      CHECK(std::abs(f.fourier(w) - QuadratureFourierSample(f, w)) < 1e-10);
    }
  }
}

TEST_CASE("zero and constant targets") {
  const std::vector<double> w{0.0, 0.5, 1.0, 2.5, -7.5};
  CHECK(ContinuousFourierSamples(ZeroTarget(), w).norm() == 0.0);
  CHECK(ContinuousFourierSamples(ZeroTarget(), w, false).norm() == 0.0);
  const Vec g = ContinuousFourierSamples(ConstantTarget(), w);
  CHECK(std::abs(g[0] - 1.0) < 1e-15);
  for (size_t i = 1; i < w.size(); ++i) {
    // |sinc|: |sin(pi w) / (pi w)|.
    const double x = std::numbers::pi * w[i];
    CHECK(std::abs(g[i]) == doctest::Approx(std::abs(std::sin(x) / x)).epsilon(1e-12));
  }
  // Integer frequencies of the indicator of [0, 1] vanish.
  CHECK(std::abs(g[2]) < 1e-15);
  CHECK_THROWS_AS(TargetById("nope"), Error);
  CHECK(TargetById("ramp").id == "ramp");
}

TEST_CASE("half-integer indexing") {
  const Index n = 8;
  CHECK(HalfIntegerIndex(0, n) == 8);
  CHECK(HalfIntegerIndex(8, n) == 0);
  CHECK(HalfIntegerIndex(1, n) == -7);
  CHECK(HalfIntegerIndex(15, n) == 7);
  CHECK_THROWS_AS(HalfIntegerIndex(16, n), Error);
  const std::vector<double> w = HalfIntegerFrequencies(n, {0, 8, 9});
  CHECK(w == std::vector<double>{4.0, 0.0, 0.5});
}

TEST_CASE("truncated Fourier series reproduces trigonometric polynomials") {
  const Index n = 32;
  const ContinuousTarget f = TrigTarget({{0, Complex(0.5)}, {5, Complex(0.2, -0.1)}, {-31, Complex(0.3)}});
  const Vec g = ContinuousFourierSamples(f, HalfIntegerFrequencies(n, AllIndices(2 * n)));
  const Vec fn = TruncatedFourierSeries(g);
  for (Index k = 0; k < 2 * n; ++k) {
    CHECK(std::abs(fn[k] - f.eval(static_cast<double>(k) / n)) < 1e-10);
  }
  CHECK_THROWS_AS(TruncatedFourierSeries(Vec::Zero(6)), Error);
}

TEST_CASE("the ramp shows Gibbs ringing in the truncated series") {
  const Index n = 256;
  const ContinuousTarget f = RampTarget();
  const Vec g = ContinuousFourierSamples(f, HalfIntegerFrequencies(n, AllIndices(2 * n)));
  const RVec fn = TruncatedFourierSeries(g).head(n).real();
  const RVec t = UnitGrid(n);
  double worst = 0;
  for (Index k = 0; k < n; ++k) worst = std::max(worst, std::abs(fn[k] - t[k]));
  CHECK(worst > 0.05);
  CHECK(GridErrorPercent(fn, f, n) > 0.0);
}

TEST_CASE("Haar coarsest function is the indicator of [0, 1]") {
  SliceSpec spec{{1, 8, BoundaryMode::kBoundaryCorrected}, 1, 8};
  const SynthesisMatrixSlice s = BuildSynthesisSlice(spec, {0.0, 1.0, -5.0, 0.5});
  CHECK(std::abs(s.entries(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(s.entries(1, 0)) < 1e-12);
  CHECK(std::abs(s.entries(2, 0)) < 1e-12);
  CHECK(std::abs(s.entries(3, 0) - ConstantTarget().fourier(0.5)) < 1e-12);
}

TEST_CASE("closed-form slice entries are the limit of the trapezoidal rule") {
  SliceSpec spec{{2, 3, BoundaryMode::kBoundaryCorrected}, 32, 8};
  const RMat nodes = BasisNodeValues(spec);
  const std::vector<double> w{0.0, 1.5, -3.0, 12.5};
  const CMat exact = SliceEntries(nodes, w);
  for (Index j : {0, 7, 31}) {
    for (size_t i = 0; i < w.size(); ++i) {
      double previous = 1e300;
      for (int refine : {1, 4, 16, 64}) {
        const double e = std::abs(TrapezoidEntry(nodes.col(j), w[i], refine) - exact(i, j));
        CHECK(e <= previous + 1e-15);
        previous = e;
      }
      CHECK(previous < 1e-6);
    }
  }
  CHECK_THROWS_AS(TrapezoidEntry(nodes.col(0), 0.0, 0), Error);
}

TEST_CASE("Parseval: half-integer samples capture the energy of each basis function") {
  // Boundary functions jump at t = 0, so their spectra decay like 1 / w^2 and
  // the band has to reach well past the node spacing.
  SliceSpec spec{{2, 3, BoundaryMode::kBoundaryCorrected}, 128, 10};
  const Index n = 4096;
  const SynthesisMatrixSlice s = BuildSynthesisSlice(spec, HalfIntegerFrequencies(n, AllIndices(2 * n)));
  const RMat nodes = BasisNodeValues(spec);
  for (Index j : {0, 17, 64, 127}) {
    const double energy = 0.5 * s.entries.col(j).squaredNorm();
    CAPTURE(j);
    CHECK(std::abs(energy / InterpolantNormSquared(nodes.col(j)) - 1.0) < 0.02);
  }
}

TEST_CASE("slice validation and synthesis") {
  SliceSpec bad{{6, 10, BoundaryMode::kBoundaryCorrected}, 100, 14};
  CHECK_THROWS_AS(ValidateSliceSpec(bad), Error);
  bad.columns = 512;
  bad.fine_log2 = 1;
  CHECK_THROWS_AS(ValidateSliceSpec(bad), Error);
  SliceSpec spec{{1, 6, BoundaryMode::kBoundaryCorrected}, 16, 6};
  Vec z = Vec::Zero(16);
  z[0] = 2.0;  // twice the coarsest Haar function: the constant 2
  const RVec v = SynthesizeOnGrid(spec, z, UnitGrid(8));
  CHECK((v.array() - 2.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(SynthesizeOnGrid(spec, Vec::Zero(3), UnitGrid(8)), Error);
}

TEST_CASE("slice cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "asymcs_slice_cache";
  std::filesystem::remove_all(dir);
  SliceSpec spec{{2, 3, BoundaryMode::kBoundaryCorrected}, 32, 8};
  const std::vector<double> w{0.0, 0.5, 4.0};
  const SynthesisMatrixSlice a = BuildSynthesisSlice(spec, w, dir.string());
  CHECK(!std::filesystem::is_empty(dir));
  const SynthesisMatrixSlice b = BuildSynthesisSlice(spec, w, dir.string());
  CHECK(a.entries == b.entries);
  std::filesystem::remove_all(dir);
}

TEST_CASE("zero data give the zero solution") {
  SliceSpec spec{{2, 3, BoundaryMode::kBoundaryCorrected}, 32, 8};
  const std::vector<double> w = HalfIntegerFrequencies(64, {60, 63, 64, 65, 70});
  const SynthesisMatrixSlice s = BuildSynthesisSlice(spec, w);
  SolverControls c;
  c.max_iterations = 50;
  const InfdimResult r = SolveInfdim(s, Vec::Zero(5), 0.0, c, UnitGrid(64));
  CHECK(r.result.estimate.norm() == 0.0);
  CHECK(r.values.norm() == 0.0);
  CHECK_THROWS_AS(SolveInfdim(s, Vec::Zero(4), 0.0, c, UnitGrid(64)), Error);
}

TEST_CASE("periodic band-limited targets: the discrete model is exact") {
  const Index n = 64;
  const ContinuousTarget f = TrigTarget({{0, Complex(0.5)}, {4, Complex(0.2)}, {-4, Complex(0.2)}});
  const std::vector<Index> all = AllIndices(2 * n);
  const Vec g = ContinuousFourierSamples(f, HalfIntegerFrequencies(n, all));
  CHECK((DiscreteModelSamples(f, n, all) - g).cwiseAbs().maxCoeff() < 1e-10);
  SolverControls c;
  c.max_iterations = 500;
  const CrimeBaselines b = RunCrimeBaselines(f, n, all, g, {6, 3, BoundaryMode::kPeriodic}, c);
  CHECK(b.linear_error < 1e-8);
  CHECK(b.discrete_error < 1e-4);
}

TEST_CASE("inverse-crime control recovers its own sparse model") {
  const Index n = 128;
  AllRoundSpec spec{20, 0.02, 2.0, 1.0};
  spec.b = CalibrateFraction(spec, 0.25, true);
  const std::vector<Index> idx = AllRoundMap(Shape::D1(2 * n), spec, 1).indices();
  SolverControls c;
  c.max_iterations = 3000;
  const InverseCrimeControl r =
      RunInverseCrimeControl(ExpCos2Target(), n, idx, {6, 4, BoundaryMode::kPeriodic}, 8, c);
  CHECK(r.error < 0.1);
  CHECK_THROWS_AS(RunInverseCrimeControl(ExpCos2Target(), n, idx, {6, 4, BoundaryMode::kPeriodic}, 0, c),
                  Error);
}
