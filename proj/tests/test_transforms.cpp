#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include "asymcs/transforms.hpp"
#include "asymcs/wavelets.hpp"
#include "oracles.hpp"

using namespace asymcs;

namespace {

std::vector<Operator> RegisteredOperators1D(Index n) {
  std::vector<Operator> ops = {
      DftOperator(Shape::D1(n)),
      FwhtOperator(Shape::D1(n), HadamardOrdering::kNatural),
      FwhtOperator(Shape::D1(n), HadamardOrdering::kSequency),
      ScrambledHadamard(Shape::D1(n), 7),
      RandomOrthogonal(n, 3),
      CenterFrequencies(Shape::D1(n)),
  };
  for (int p : {1, 2, 3, 4, 6, 8}) {
    const int r = n >= 32 ? 2 : 1;
    ops.push_back(DwtOperator(Shape::D1(n), {p, r, BoundaryMode::kPeriodic}));
    const WaveletSpec bc{p, 1, BoundaryMode::kBoundaryCorrected};
    if (2 * (2 * p - 1) <= n) ops.push_back(DwtOperator(Shape::D1(n), bc));
  }
  return ops;
}

double DetailNorm(const Vec& c, Index scaling) { return c.tail(c.size() - scaling).norm(); }

}  // namespace

TEST_CASE("dft: unitary scaling and impulse responses") {
  Vec ones = Vec::Ones(8);
  Vec y = Dft(ones, Shape::D1(8), Direction::kForward);
  CHECK(std::abs(y[0] - Complex(std::sqrt(8.0), 0)) < 1e-12);
  for (Index i = 1; i < 8; ++i) CHECK(std::abs(y[i]) < 1e-12);

  Vec delta = Vec::Zero(4);
  delta[0] = 1.0;
  y = Dft(delta, Shape::D1(4), Direction::kForward);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(y[i] - Complex(0.5, 0)) < 1e-12);
}

TEST_CASE("dft: matches the direct O(N^2) sum") {
  const Vec x = oracle::RandomVec(64, 11);
  const Vec fast = Dft(x, Shape::D1(64), Direction::kForward);
  const Vec slow = oracle::DftMatrix(64) * x;
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(fast.norm() - x.norm()) < 1e-12 * x.norm());
  const Vec back = Dft(fast, Shape::D1(64), Direction::kInverse);
  CHECK((back - x).norm() < 1e-12 * x.norm());
}

TEST_CASE("dft: rejects non-power-of-two lengths") {
  CHECK_THROWS_AS(Dft(Vec::Zero(12), Shape::D1(12), Direction::kForward), Error);
  try {
    DftOperator(Shape::D1(6));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidShape);
  }
}

TEST_CASE("fwht: impulse, involution and sequency order") {
  Vec delta = Vec::Zero(8);
  delta[0] = 1.0;
  const Vec y = Fwht(delta, Shape::D1(8), Direction::kForward, HadamardOrdering::kNatural);
  for (Index i = 0; i < 8; ++i) CHECK(std::abs(y[i] - 1.0 / std::sqrt(8.0)) < 1e-12);

  const Vec x = oracle::RandomVec(16, 5);
  const Vec twice = Fwht(Fwht(x, Shape::D1(16), Direction::kForward, HadamardOrdering::kNatural),
                         Shape::D1(16), Direction::kForward, HadamardOrdering::kNatural);
  CHECK((twice - x).norm() < 1e-12 * x.norm());

  // Brute force: sort Sylvester rows by sign-change count.
  const RMat syl = oracle::HadamardMatrix(8);
  const CMat seq = Materialize(FwhtOperator(Shape::D1(8), HadamardOrdering::kSequency));
  const RMat seq_re = seq.real();
  CHECK(oracle::SignChanges(seq_re, 3) == 3);
  for (Index s = 0; s < 8; ++s) {
    CHECK(oracle::SignChanges(seq_re, s) == s);
    int match = -1;
    for (Index r = 0; r < 8; ++r)
      if ((syl.row(r) - seq_re.row(s)).cwiseAbs().maxCoeff() < 1e-12) match = static_cast<int>(r);
    CHECK(match >= 0);
  }
}

TEST_CASE("fwht: sequency counts strictly increase at larger sizes") {
  for (Index n : {16, 64}) {
    const RMat m = Materialize(FwhtOperator(Shape::D1(n), HadamardOrdering::kSequency)).real();
    for (Index s = 0; s < n; ++s) CHECK(oracle::SignChanges(m, s) == s);
  }
}

TEST_CASE("daubechies filters") {
  const RVec h2 = DaubechiesLowpass(2);
  const double s3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
  CHECK(std::abs(h2[0] - (1 + s3) / d) < 1e-13);
  CHECK(std::abs(h2[1] - (3 + s3) / d) < 1e-13);
  CHECK(std::abs(h2[2] - (3 - s3) / d) < 1e-13);
  CHECK(std::abs(h2[3] - (1 - s3) / d) < 1e-13);
  for (int p = 1; p <= 8; ++p) {
    const RVec h = DaubechiesLowpass(p);
    const RVec g = HighpassFromLowpass(h);
    CHECK(std::abs(h.sum() - std::sqrt(2.0)) < 1e-13);
    // p vanishing moments of the high-pass filter.
    for (int j = 0; j < p; ++j) {
      double m = 0, scale = 0;
      for (Index i = 0; i < g.size(); ++i) {
        m += g[i] * std::pow(static_cast<double>(i), j);
        scale += std::abs(g[i]) * std::pow(static_cast<double>(i), j);
      }
      CHECK(std::abs(m) < 1e-10 * scale);
    }
  }
  CHECK_THROWS_AS(DaubechiesLowpass(9), Error);
}

TEST_CASE("dwt: constant signal has no detail energy") {
  const WaveletSpec spec{4, 3, BoundaryMode::kPeriodic};
  const Vec c = Dwt(Vec::Ones(64), Shape::D1(64), spec, Direction::kForward);
  CHECK(c.tail(64 - 8).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dwt: boundary correction annihilates a ramp, periodic does not") {
  Vec ramp(64);
  for (Index i = 0; i < 64; ++i) ramp[i] = static_cast<double>(i);
  const Vec cb = Dwt(ramp, Shape::D1(64), {4, 3, BoundaryMode::kBoundaryCorrected},
                     Direction::kForward);
  CHECK(cb.tail(56).cwiseAbs().maxCoeff() < 1e-8);
  const Vec cp = Dwt(ramp, Shape::D1(64), {4, 3, BoundaryMode::kPeriodic},
                     Direction::kForward);
  // Periodic wrap turns the ramp into a sawtooth: O(1) detail energy.
  CHECK(DetailNorm(cp, 8) > 1.0);
}

TEST_CASE("dwt: polynomial reproduction for every order") {
  const Index n = 256;
  for (int p = 2; p <= 8; ++p) {
    int r = 1;
    while ((Index{1} << (r + 1)) * (2 * p - 1) <= n) ++r;
    const WaveletSpec bc{p, r, BoundaryMode::kBoundaryCorrected};
    const WaveletSpec per{p, 2, BoundaryMode::kPeriodic};
    const Index scaling = n >> r;
    for (int deg = 0; deg < p; ++deg) {
      Vec poly(n);
      for (Index i = 0; i < n; ++i) poly[i] = std::pow(static_cast<double>(i) / n, deg);
      const Vec c = Dwt(poly, Shape::D1(n), bc, Direction::kForward);
      CHECK_MESSAGE(c.tail(n - scaling).cwiseAbs().maxCoeff() < 1e-8,
                    "db" << p << " degree " << deg);
      // Periodic: only details whose filter support wraps are nonzero.
      const Vec cp = Dwt(poly, Shape::D1(n), per, Direction::kForward);
      const Index finest = n / 2;
      for (Index k = 0; k + p < finest; ++k) {
        CHECK(std::abs(cp[finest + k]) < 1e-8);
      }
    }
  }
}

TEST_CASE("dwt: round trip and depth validation") {
  const Vec x = oracle::RandomVec(128, 9);
  for (int p = 1; p <= 8; ++p) {
    for (auto mode : {BoundaryMode::kPeriodic, BoundaryMode::kBoundaryCorrected}) {
      const WaveletSpec spec{p, 3, mode};
      if (mode == BoundaryMode::kBoundaryCorrected && 8 * (2 * p - 1) > 128) continue;
      const Vec c = Dwt(x, Shape::D1(128), spec, Direction::kForward);
      const Vec back = Dwt(c, Shape::D1(128), spec, Direction::kInverse);
      CHECK((back - x).norm() < 1e-10 * x.norm());
    }
  }
  CHECK_THROWS_AS(Dwt(Vec::Zero(64), Shape::D1(64), {4, 4, BoundaryMode::kBoundaryCorrected},
                      Direction::kForward),
                  Error);
  CHECK_THROWS_AS(Dwt(Vec::Zero(8), Shape::D1(8), {1, 4, BoundaryMode::kPeriodic},
                      Direction::kForward),
                  Error);
}

TEST_CASE("dwt: 2D isotropic levels and ordering") {
  const Shape s = Shape::D2(32);
  const WaveletSpec spec{3, 3, BoundaryMode::kPeriodic};
  const Vec c = Dwt(Vec::Ones(32 * 32), s, spec, Direction::kForward);
  const LevelStructure lev = WaveletLevels(s, 3);
  CHECK(lev.boundaries() == std::vector<Index>{16, 64, 256, 1024});
  CHECK(c.tail(1024 - 16).cwiseAbs().maxCoeff() < 1e-10);
  const std::vector<Index> order = WaveletLevelOrder2D(32, 3);
  std::vector<Index> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i < 1024; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("compose: chains forward and reversed adjoints") {
  const Shape s = Shape::D1(64);
  const Operator idwt = DwtOperator(s, {4, 3, BoundaryMode::kPeriodic}).adjoint();
  const Operator u = Compose({DftOperator(s), idwt});
  const Vec x = oracle::RandomVec(64, 1);
  CHECK((u.apply_adjoint(u.apply(x)) - x).norm() < 1e-10 * x.norm());

  const Operator single = Compose({DftOperator(s)});
  for (int t = 0; t < 10; ++t) {
    const Vec v = oracle::RandomVec(64, 100 + t);
    CHECK((single.apply(v) - DftOperator(s).apply(v)).norm() < 1e-14);
  }

  const Shape s16 = Shape::D1(16);
  const Operator haar_inv = DwtOperator(s16, {1, 4, BoundaryMode::kPeriodic}).adjoint();
  const CMat m = Materialize(Compose({DftOperator(s16), haar_inv}));
  CHECK(std::abs(m(0, 0) - Complex(1.0, 0.0)) < 1e-12);
  // Brute force: product of materialized factors.
  const CMat prod = oracle::DftMatrix(16) * Materialize(haar_inv);
  CHECK(oracle::MaxAbs(prod - m) < 1e-12);

  CHECK_THROWS_AS(Compose({DftOperator(s16), DftOperator(s)}), Error);
}

TEST_CASE("tensor2d: separable application") {
  const Operator h2 = Tensor2d(FwhtOperator(Shape::D1(8), HadamardOrdering::kNatural));
  Vec delta = Vec::Zero(64);
  delta[0] = 1.0;
  const Vec y = h2.apply(delta);
  for (Index i = 0; i < 64; ++i) CHECK(std::abs(y[i] - 1.0 / 8.0) < 1e-12);

  const Operator w2 = Tensor2d(DwtOperator(Shape::D1(32), {2, 2, BoundaryMode::kPeriodic}));
  const Vec x = oracle::RandomVec(32 * 32, 4);
  CHECK(std::abs(w2.apply(x).norm() - x.norm()) < 1e-10 * x.norm());

  const CMat t = Materialize(Tensor2d(DftOperator(Shape::D1(8))));
  const CMat d8 = oracle::DftMatrix(8);
  CHECK(oracle::MaxAbs(t - oracle::Kronecker(d8, d8)) < 1e-12);
  CHECK(oracle::MaxAbs(Materialize(DftOperator(Shape::D2(8))) - t) < 1e-12);
  const CMat f2 = Materialize(FwhtOperator(Shape::D2(8), HadamardOrdering::kSequency));
  const CMat f2t = Materialize(Tensor2d(FwhtOperator(Shape::D1(8), HadamardOrdering::kSequency)));
  CHECK(oracle::MaxAbs(f2 - f2t) < 1e-12);
}

TEST_CASE("invariant: isometry and round trip on 100 seeded probes") {
  std::vector<Operator> ops = RegisteredOperators1D(64);
  ops.push_back(DftOperator(Shape::D2(16)));
  ops.push_back(FwhtOperator(Shape::D2(16), HadamardOrdering::kSequency));
  ops.push_back(DwtOperator(Shape::D2(16), {2, 2, BoundaryMode::kPeriodic}));
  ops.push_back(DwtOperator(Shape::D2(32), {2, 2, BoundaryMode::kBoundaryCorrected}));
  ops.push_back(ScrambledHadamard(Shape::D2(16), 2));
  for (const Operator& op : ops) {
    for (int t = 0; t < 100; ++t) {
      const Vec x = oracle::RandomVec(op.cols(), 1000 + t);
      const Vec y = op.apply(x);
      CHECK_MESSAGE(std::abs(y.norm() - x.norm()) <= 1e-10 * x.norm(), op.kind());
      CHECK_MESSAGE((op.apply_adjoint(y) - x).norm() <= 1e-10 * x.norm(), op.kind());
    }
  }
}

TEST_CASE("invariant: materialized matrices are orthogonal at N <= 16") {
  std::vector<Operator> ops = RegisteredOperators1D(16);
  ops.push_back(DftOperator(Shape::D2(4)));
  ops.push_back(DwtOperator(Shape::D2(4), {1, 2, BoundaryMode::kPeriodic}));
  ops.push_back(DwtOperator(Shape::D1(16), {2, 1, BoundaryMode::kBoundaryCorrected}));
  for (const Operator& op : ops) {
    const CMat m = Materialize(op);
    const CMat gram = m.adjoint() * m;
    CHECK_MESSAGE(oracle::MaxAbs(gram - CMat::Identity(m.cols(), m.cols())) < 1e-10, op.kind());
    // Adjoint rule agrees with the conjugate transpose.
    CMat adj(m.cols(), m.rows());
    Vec e = Vec::Zero(m.rows());
    for (Index j = 0; j < m.rows(); ++j) {
      e[j] = 1.0;
      adj.col(j) = op.apply_adjoint(e);
      e[j] = 0.0;
    }
    CHECK_MESSAGE(oracle::MaxAbs(adj - m.adjoint()) < 1e-12, op.kind());
  }
}

TEST_CASE("operators are safe to apply concurrently") {
  const Operator u = Compose({DftOperator(Shape::D1(256)),
                              DwtOperator(Shape::D1(256), {4, 3, BoundaryMode::kBoundaryCorrected}).adjoint()});
  const Vec x = oracle::RandomVec(256, 8);
  const Vec ref = u.apply(x);
  std::vector<Vec> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { results[t] = u.apply(x); });
  for (auto& th : threads) th.join();
  for (const Vec& r : results) CHECK((r - ref).norm() == 0.0);
}
