#include "asymcs/fmsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace asymcs {
namespace {

Vec ToVec(const RMat& x) {
  const Index n = x.rows();
  Vec v(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) v[i * n + j] = x(i, j);
  return v;
}

RMat ToImage(const Vec& v, Index n, bool clamp) {
  RMat x(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double r = v[i * n + j].real();
      x(i, j) = clamp ? std::clamp(r, 0.0, 1.0) : r;
    }
  return x;
}

void CheckMeasurementSet(const MeasurementSet& m) {
  if (m.ones_row_index < 0 || m.ones_row_index >= static_cast<Index>(m.rows.size()) ||
      m.rows[m.ones_row_index] != 0) {
    throw Error(ErrorCode::kInvalidArgument, "ones_row_index",
                "the all-ones measurement is missing from the set");
  }
  if (m.counts.size() != m.rows.size()) {
    throw Error(ErrorCode::kInvalidShape, "counts", "one count per sampled row required");
  }
  if (!(m.scale > 0)) throw Error(ErrorCode::kInvalidArgument, "scale", "must be > 0");
}

Operator HadamardOrthonormal(Index n) {
  return FwhtOperator(Shape::D2(n), HadamardOrdering::kSequency);
}

// (Psi + Ones) / 2 in orthonormal units.
Operator HalfSum(Index n) {
  const Operator h = HadamardOrthonormal(n);
  const Operator ones = OnesOperator(n);
  const Shape s = Shape::D2(n);
  return Operator(
      "pattern", s, s, [h, ones](const Vec& x) { return Vec(0.5 * (h.apply(x) + ones.apply(x))); },
      [h, ones](const Vec& y) { return Vec(0.5 * (h.apply_adjoint(y) + ones.apply_adjoint(y))); },
      false);
}

CfmRecovery Solve(const Operator& u, const std::vector<Index>& rows, const Vec& y, double eta,
                  const WaveletSpec& wavelet, Index n, const SolverControls& controls,
                  const RMat* truth) {
  const Operator synthesis = DwtOperator(Shape::D2(n), wavelet).adjoint();
  RecoveryProblem p{.op = Compose({u, synthesis})};
  p.omega = rows;
  p.y = y;
  p.eta = eta;
  p.synthesis = synthesis;
  p.controls = controls;
  p.controls.real_coefficients = true;
  if (truth) p.truth = ToVec(*truth);
  CfmRecovery out;
  out.result = SolveL1(p);
  out.image = ToImage(out.result.reconstruction, n, true);
  if (truth) out.error = RelativeErrorPercent(ToVec(out.image), ToVec(*truth));
  return out;
}

}  // namespace

void ValidatePsf(const PsfSpec& psf) {
  if (!(psf.cutoff > 0.0 && psf.cutoff <= std::sqrt(2.0) + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "cutoff", "must lie in (0, sqrt(2)]");
  }
}

std::vector<bool> PsfMask(const PsfSpec& psf, Index n) {
  ValidatePsf(psf);
  ValidateShape(Shape::D2(n));
  std::vector<bool> mask(static_cast<size_t>(n * n));
  const double half = static_cast<double>(n) / 2.0;
  // A cutoff of sqrt(2) must keep the corner (-1, -1) despite rounding.
  const double r2 = psf.cutoff * psf.cutoff * (1 + 1e-12);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) {
      const double fr = (static_cast<double>(r) - half) / half;
      const double fc = (static_cast<double>(c) - half) / half;
      mask[r * n + c] = fr * fr + fc * fc <= r2;
    }
  return mask;
}

Operator PsfOperator(const PsfSpec& psf, Index n) {
  const std::vector<bool> centered = PsfMask(psf, n);
  // Same mask in natural DFT order.
  std::vector<bool> natural(centered.size());
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c)
      natural[((r + n / 2) % n) * n + (c + n / 2) % n] = centered[r * n + c];
  const Shape s = Shape::D2(n);
  auto rule = [natural, s](const Vec& x) {
    Vec f = Dft(x, s, Direction::kForward);
    for (Index k = 0; k < f.size(); ++k)
      if (!natural[k]) f[k] = 0;
    return Dft(f, s, Direction::kInverse);
  };
  const bool all_pass = std::all_of(natural.begin(), natural.end(), [](bool b) { return b; });
  return Operator("psf", s, s, rule, rule, all_pass);
}

Operator OnesOperator(Index n) {
  const Shape s = Shape::D2(n);
  ValidateShape(s);
  auto rule = [n](const Vec& x) {
    return Vec(Vec::Constant(x.size(), x.sum() / static_cast<double>(n)));
  };
  return Operator("ones", s, s, rule, rule, false);
}

Operator PatternOperator(Index n, const PsfSpec& psf) {
  return Compose({HalfSum(n), PsfOperator(psf, n)});
}

MeasurementSet ForwardModel(const RMat& x, const PsfSpec& psf, const SamplingMap& omega,
                            double budget) {
  const Index n = x.rows();
  if (x.cols() != n) throw Error(ErrorCode::kInvalidShape, "x", "image must be square");
  ValidateShape(Shape::D2(n));
  if (!(omega.shape == Shape::D2(n))) {
    throw Error(ErrorCode::kInvalidShape, "omega", "map does not match the image grid");
  }
  if (x.size() && x.minCoeff() < 0.0) {
    throw Error(ErrorCode::kOutOfRange, "x", "intensities must be nonnegative");
  }
  if (!(budget > 0)) throw Error(ErrorCode::kInvalidArgument, "budget", "must be > 0");
  if (!omega.mask[0]) {
    throw Error(ErrorCode::kInvalidArgument, "omega", "must contain the all-ones row (index 0)");
  }
  MeasurementSet m;
  m.n = n;
  m.omega = omega;
  m.rows = omega.indices();
  m.ones_row_index = 0;
  const double total = x.sum();
  m.scale = total > 0 ? budget / total : 1.0;
  const Vec v = PatternOperator(n, psf).apply(ToVec(x) * m.scale) * static_cast<double>(n);
  m.gamma.resize(static_cast<Index>(m.rows.size()));
  m.counts.resize(m.rows.size());
  for (size_t i = 0; i < m.rows.size(); ++i) {
    m.gamma[i] = std::floor(std::abs(v[m.rows[i]]));
    m.counts[i] = static_cast<std::int64_t>(m.gamma[i]);
  }
  return m;
}

std::vector<std::int64_t> PoissonSample(const RVec& gamma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> y(static_cast<size_t>(gamma.size()));
  for (Index i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] >= 0)) throw Error(ErrorCode::kOutOfRange, "gamma", "means must be >= 0");
    if (gamma[i] == 0) {
      y[i] = 0;
      continue;
    }
    std::poisson_distribution<std::int64_t> d(gamma[i]);
    y[i] = d(rng);
  }
  return y;
}

RVec CorrectMeasurements(const MeasurementSet& m) {
  CheckMeasurementSet(m);
  const double y1 = static_cast<double>(m.counts[m.ones_row_index]);
  RVec out(static_cast<Index>(m.counts.size()));
  for (size_t i = 0; i < m.counts.size(); ++i) out[i] = 2.0 * static_cast<double>(m.counts[i]) - y1;
  return out;
}

double CorrectedNoiseRadius(const MeasurementSet& m) {
  CheckMeasurementSet(m);
  const double y1 = static_cast<double>(m.counts[m.ones_row_index]);
  double var = 0;
  for (size_t i = 0; i < m.counts.size(); ++i) {
    const double yi = static_cast<double>(m.counts[i]);
    var += static_cast<Index>(i) == m.ones_row_index ? y1 : 4.0 * yi + y1;
  }
  return std::sqrt(var) / (static_cast<double>(m.n) * m.scale);
}

double RawNoiseRadius(const MeasurementSet& m) {
  CheckMeasurementSet(m);
  double var = 0;
  for (std::int64_t c : m.counts) var += static_cast<double>(c);
  return std::sqrt(var) / (static_cast<double>(m.n) * m.scale);
}

CfmRecovery RecoverCfm(const MeasurementSet& m, const PsfSpec& psf, const WaveletSpec& wavelet,
                       CfmMode mode, double eta, const SolverControls& controls,
                       const RMat* truth) {
  const RVec yc = CorrectMeasurements(m);
  const Index n = m.n;
  const Vec y = (yc / (static_cast<double>(n) * m.scale)).cast<Complex>();
  if (eta < 0) eta = CorrectedNoiseRadius(m);
  const Operator h = HadamardOrthonormal(n);
  const Operator u = mode == CfmMode::kFullChain ? Compose({h, PsfOperator(psf, n)}) : h;
  return Solve(u, m.rows, y, eta, wavelet, n, controls, truth);
}

BaselineRecovery InitialApproachBaseline(const BaselineSetup& s) {
  const Index n = s.x.rows();
  ValidateShape(Shape::D2(n));
  if (!(s.fraction > 0 && s.fraction <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "fraction", "must lie in (0, 1]");
  }
  const Index budget_rows = std::llround(s.fraction * static_cast<double>(n * n));
  const SamplingMap map =
      HalfHalfMap(Shape::D2(n), s.fraction, std::max<Index>(1, budget_rows / 2), s.seed,
                  SquareShellOrder(n));
  BaselineRecovery out;
  out.measurements = ForwardModel(s.x, s.psf, map, s.budget);
  out.measurements.counts = PoissonSample(out.measurements.gamma, s.seed);
  const MeasurementSet& m = out.measurements;
  RVec raw(static_cast<Index>(m.counts.size()));
  for (size_t i = 0; i < m.counts.size(); ++i) raw[i] = static_cast<double>(m.counts[i]);
  const Vec y = (raw / (static_cast<double>(n) * m.scale)).cast<Complex>();
  out.recovery = Solve(HalfSum(n), m.rows, y, RawNoiseRadius(m), s.wavelet, n, s.controls, &s.x);
  return out;
}

RVec PatternNormRatios(Index n, int probes, std::uint64_t seed) {
  if (probes < 1) throw Error(ErrorCode::kInvalidArgument, "probes", "must be >= 1");
  const Operator p = HalfSum(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RVec r(probes);
  for (int k = 0; k < probes; ++k) {
    Vec x(n * n);
    for (Index i = 0; i < x.size(); ++i) x[i] = g(rng);
    r[k] = p.apply(x).norm() / x.norm();
  }
  return r;
}

void WriteBinaryArray(const std::string& path, const RVec& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  const std::int64_t count = values.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(sizeof(double) * values.size()));
}

RVec ReadBinaryArray(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path, "cannot open for reading");
  std::int64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count < 0) throw Error(ErrorCode::kIo, path, "malformed header");
  RVec v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * count));
  if (!in) throw Error(ErrorCode::kIo, path, "truncated data");
  return v;
}

}  // namespace asymcs
