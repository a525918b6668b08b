#include "asymcs/infdim.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "asymcs/wavelets.hpp"

namespace asymcs {
namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// ∫_0^L exp(a t) dt.
Complex ExpIntegral(Complex a, double length) {
  if (std::abs(a) < 1e-12) return length + a * length * length / 2.0;
  return (std::exp(a * length) - 1.0) / a;
}

// ∫_0^1 (1 - s) e^{c s} ds and ∫_0^1 s e^{c s} ds.
std::pair<Complex, Complex> HatIntegrals(Complex c) {
  if (std::abs(c) < 1.0) {
    Complex i0 = 0, i1 = 0, term = 1.0;  // term = c^n / n!
    for (int n = 0; n < 30; ++n) {
      i0 += term / static_cast<double>((n + 1) * (n + 2));
      i1 += term / static_cast<double>(n + 2);
      term *= c / static_cast<double>(n + 1);
    }
    return {i0, i1};
  }
  const Complex e = std::exp(c);
  const Complex i1 = e * (1.0 / c - 1.0 / (c * c)) + 1.0 / (c * c);
  return {(e - 1.0) / c - i1, i1};
}

Index FineSize(const SliceSpec& spec) { return Index{1} << spec.fine_log2; }

std::string SliceKey(const SliceSpec& spec, const std::vector<double>& w) {
  std::ostringstream s;
  s.precision(17);
  s << spec.wavelet.str() << "|" << spec.columns << "|" << spec.fine_log2;
  for (double x : w) s << "|" << x;
  // FNV-1a.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vec ToComplex(const RVec& v) { return v.cast<Complex>(); }

}  // namespace

ContinuousTarget ZeroTarget() {
  return {"zero", 1.0, [](double) { return Complex(0); }, [](double) { return Complex(0); }};
}

ContinuousTarget ConstantTarget() {
  return {"one", 1.0, [](double) { return Complex(1); },
          [](double w) { return ExpIntegral(-2.0 * kPi * kI * w, 1.0); }};
}

ContinuousTarget ExpCos2Target() {
  // exp(-t) cos^2 t = exp(-t)/2 + exp((-1 + 2i) t)/4 + exp((-1 - 2i) t)/4.
  return {"expcos2", 1.0,
          [](double t) { return Complex(std::exp(-t) * std::cos(t) * std::cos(t)); },
          [](double w) {
            const Complex s = -2.0 * kPi * kI * w;
            return 0.5 * ExpIntegral(-1.0 + s, 1.0) + 0.25 * ExpIntegral(Complex(-1, 2) + s, 1.0) +
                   0.25 * ExpIntegral(Complex(-1, -2) + s, 1.0);
          }};
}

ContinuousTarget RampTarget() {
  return {"ramp", 1.0, [](double t) { return Complex(t); },
          [](double w) {
            if (w == 0.0) return Complex(0.5);
            const Complex c = -2.0 * kPi * kI * w;
            return std::exp(c) * (1.0 / c - 1.0 / (c * c)) + 1.0 / (c * c);
          }};
}

ContinuousTarget TrigTarget(const std::vector<std::pair<int, Complex>>& terms) {
  return {"trig", 2.0,
          [terms](double t) {
            Complex v = 0;
            for (const auto& [j, c] : terms) v += c * std::exp(kI * kPi * static_cast<double>(j) * t);
            return v;
          },
          [terms](double w) {
            Complex v = 0;
            for (const auto& [j, c] : terms)
              v += c * ExpIntegral(kI * kPi * static_cast<double>(j) - 2.0 * kPi * kI * w, 2.0);
            return v;
          }};
}

ContinuousTarget TargetById(const std::string& id) {
  if (id == "zero") return ZeroTarget();
  if (id == "one") return ConstantTarget();
  if (id == "expcos2") return ExpCos2Target();
  if (id == "ramp") return RampTarget();
  throw Error(ErrorCode::kInvalidArgument, "target", "unknown target '" + id + "'");
}

Complex QuadratureFourierSample(const ContinuousTarget& target, double w, double tolerance) {
  using boost::math::quadrature::gauss_kronrod;
  // Split so that each piece holds at most a quarter oscillation.
  const int pieces = std::max(1, static_cast<int>(std::ceil(4.0 * std::abs(w) * target.support)));
  const double step = target.support / pieces;
  double re = 0, im = 0, err = 0;
  for (int k = 0; k < pieces; ++k) {
    const double a = k * step, b = (k + 1) * step;
    double e1 = 0, e2 = 0;
    re += gauss_kronrod<double, 31>::integrate(
        [&](double t) { return (target.eval(t) * std::exp(-2.0 * kPi * kI * w * t)).real(); }, a, b,
        15, 1e-14, &e1);
    im += gauss_kronrod<double, 31>::integrate(
        [&](double t) { return (target.eval(t) * std::exp(-2.0 * kPi * kI * w * t)).imag(); }, a, b,
        15, 1e-14, &e2);
    // The reported errors are relative to each piece's integral.
    err += e1 * std::abs(re) + e2 * std::abs(im);
  }
  if (!(err <= tolerance)) {
    throw Error(ErrorCode::kConstruction, "quadrature",
                "error estimate " + std::to_string(err) + " above tolerance");
  }
  return {re, im};
}

Vec ContinuousFourierSamples(const ContinuousTarget& target, const std::vector<double>& w,
                             bool prefer_closed_form) {
  Vec out(static_cast<Index>(w.size()));
  const bool closed = prefer_closed_form && static_cast<bool>(target.fourier);
  ParallelFor(out.size(), [&](Index i) {
    out[i] = closed ? target.fourier(w[i]) : QuadratureFourierSample(target, w[i]);
  });
  return out;
}

int HalfIntegerIndex(Index c, Index n_half) {
  if (c < 0 || c >= 2 * n_half) throw Error(ErrorCode::kOutOfRange, "index", "outside [0, 2N)");
  return c == 0 ? static_cast<int>(n_half) : static_cast<int>(c - n_half);
}

std::vector<double> HalfIntegerFrequencies(Index n_half, const std::vector<Index>& centered) {
  std::vector<double> w;
  for (Index c : centered) w.push_back(0.5 * HalfIntegerIndex(c, n_half));
  return w;
}

Vec TruncatedFourierSeries(const Vec& samples) {
  const Index two_n = samples.size();
  if (!IsPowerOfTwo(two_n) || two_n < 2) {
    throw Error(ErrorCode::kInvalidShape, "samples", "need 2N samples with N a power of two");
  }
  const Index n = two_n / 2;
  Vec natural(two_n);
  for (Index c = 0; c < two_n; ++c) {
    const Index j = HalfIntegerIndex(c, n);
    natural[((j % two_n) + two_n) % two_n] = samples[c];
  }
  return 0.5 * std::sqrt(static_cast<double>(two_n)) *
         Dft(natural, Shape::D1(two_n), Direction::kInverse);
}

void ValidateSliceSpec(const SliceSpec& spec) {
  if (spec.fine_log2 < 2 || spec.fine_log2 > 20) {
    throw Error(ErrorCode::kInvalidArgument, "fine_log2", "must lie in [2, 20]");
  }
  const Index m = FineSize(spec);
  ValidateWaveletSpec(spec.wavelet, m);
  const Index coarse = m >> spec.wavelet.levels;
  bool ok = false;
  for (Index k = coarse; k <= m; k *= 2) ok = ok || k == spec.columns;
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument, "columns",
                "K must be a level boundary (" + std::to_string(coarse) + " * 2^i)");
  }
}

RMat BasisNodeValues(const SliceSpec& spec) {
  ValidateSliceSpec(spec);
  const Index m = FineSize(spec);
  const auto plan = GetWaveletPlan(m, spec.wavelet);
  RMat nodes(m, spec.columns);
  const double scale = std::sqrt(static_cast<double>(m));
  ParallelFor(spec.columns, [&](Index j) {
    RVec v = RVec::Zero(m);
    v[j] = 1.0;
    plan->Inverse1D(v.data());
    nodes.col(j) = scale * v;
  });
  return nodes;
}

CMat SliceEntries(const RMat& nodes, const std::vector<double>& frequencies) {
  const Index m = nodes.rows();
  if (m < 2) throw Error(ErrorCode::kInvalidShape, "nodes", "need at least two nodes");
  const double h = 1.0 / static_cast<double>(m - 1);
  const Index rows = static_cast<Index>(frequencies.size());
  CMat out(rows, nodes.cols());
  constexpr Index kChunk = 32;
  const Index chunks = (rows + kChunk - 1) / kChunk;
  ParallelFor(chunks, [&](Index ch) {
    const Index r0 = ch * kChunk, r1 = std::min(rows, r0 + kChunk);
    RMat wr(r1 - r0, m), wi(r1 - r0, m);
    for (Index r = r0; r < r1; ++r) {
      const double w = frequencies[r];
      const double theta = 2.0 * kPi * w * h;
      const auto [i0, i1] = HatIntegrals(Complex(0.0, -theta));
      const Complex back = std::exp(kI * theta) * i1;
      for (Index k = 0; k < m; ++k) {
        Complex c = 0;
        if (k + 1 < m) c += i0;
        if (k > 0) c += back;
        // Phase via the integer product keeps rounding independent of k.
        const Complex wk = h * c * std::exp(-2.0 * kPi * kI * w * (static_cast<double>(k) * h));
        wr(r - r0, k) = wk.real();
        wi(r - r0, k) = wk.imag();
      }
    }
    const RMat re = wr * nodes, im = wi * nodes;
    for (Index r = r0; r < r1; ++r)
      for (Index j = 0; j < nodes.cols(); ++j) out(r, j) = Complex(re(r - r0, j), im(r - r0, j));
  });
  return out;
}

SynthesisMatrixSlice BuildSynthesisSlice(const SliceSpec& spec,
                                         const std::vector<double>& frequencies,
                                         const std::string& cache_dir) {
  ValidateSliceSpec(spec);
  SynthesisMatrixSlice slice{spec, frequencies, CMat()};
  const Index rows = static_cast<Index>(frequencies.size());
  std::filesystem::path bin, meta;
  if (!cache_dir.empty()) {
    const std::string key = SliceKey(spec, frequencies);
    bin = std::filesystem::path(cache_dir) / ("slice_" + key + ".bin");
    meta = std::filesystem::path(cache_dir) / ("slice_" + key + ".json");
    std::ifstream in(bin, std::ios::binary);
    if (in) {
      CMat e(rows, spec.columns);
      in.read(reinterpret_cast<char*>(e.data()),
              static_cast<std::streamsize>(sizeof(Complex) * e.size()));
      if (in && in.peek() == std::char_traits<char>::eof()) {
        slice.entries = std::move(e);
        return slice;
      }
    }
  }
  slice.entries = SliceEntries(BasisNodeValues(spec), frequencies);
  if (!cache_dir.empty()) {
    std::filesystem::create_directories(cache_dir);
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, bin.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(slice.entries.data()),
              static_cast<std::streamsize>(sizeof(Complex) * slice.entries.size()));
    json j;
    j["wavelet"] = spec.wavelet.str();
    j["columns"] = spec.columns;
    j["fine_log2"] = spec.fine_log2;
    j["quadrature"] = "exact integral of the piecewise-linear node interpolant";
    j["rows"] = rows;
    j["frequencies"] = frequencies;
    std::ofstream m(meta);
    m << j.dump(2) << "\n";
  }
  return slice;
}

Complex TrapezoidEntry(const RVec& node_values, double w, int refine) {
  if (refine < 1) throw Error(ErrorCode::kInvalidArgument, "refine", "must be >= 1");
  const Index m = node_values.size();
  const double h = 1.0 / static_cast<double>(m - 1);
  const double d = h / refine;
  Complex sum = 0;
  for (Index k = 0; k + 1 < m; ++k) {
    for (int q = 0; q <= refine; ++q) {
      const double s = static_cast<double>(q) / refine;
      const double t = (static_cast<double>(k) + s) * h;
      const double v = (1 - s) * node_values[k] + s * node_values[k + 1];
      const double weight = (q == 0 || q == refine) ? 0.5 : 1.0;
      sum += weight * v * std::exp(-2.0 * kPi * kI * w * t);
    }
  }
  return d * sum;
}

RVec SynthesizeOnGrid(const SliceSpec& spec, const Vec& z, const RVec& t) {
  ValidateSliceSpec(spec);
  if (z.size() != spec.columns) {
    throw Error(ErrorCode::kInvalidShape, "z", "one coefficient per column required");
  }
  const Index m = FineSize(spec);
  const auto plan = GetWaveletPlan(m, spec.wavelet);
  RVec v = RVec::Zero(m);
  v.head(spec.columns) = z.real();
  plan->Inverse1D(v.data());
  v *= std::sqrt(static_cast<double>(m));
  RVec out(t.size());
  for (Index i = 0; i < t.size(); ++i) {
    const double s = std::clamp(t[i], 0.0, 1.0) * static_cast<double>(m - 1);
    const Index k = std::min<Index>(static_cast<Index>(s), m - 2);
    const double f = s - static_cast<double>(k);
    out[i] = (1 - f) * v[k] + f * v[k + 1];
  }
  return out;
}

InfdimResult SolveInfdim(const SynthesisMatrixSlice& slice, const Vec& samples, double eta,
                         const SolverControls& controls, const RVec& eval_grid,
                         const ContinuousTarget* target) {
  const Index rows = slice.entries.rows(), cols = slice.entries.cols();
  if (samples.size() != rows) {
    throw Error(ErrorCode::kInvalidShape, "samples", "one sample per slice row required");
  }
  const CMat a = slice.entries;
  const Operator op("infdim-slice", Shape::D1(cols), Shape::D1(rows),
                    [a](const Vec& z) { return Vec(a * z); },
                    [a](const Vec& y) { return Vec(a.adjoint() * y); }, false);
  std::vector<Index> omega(static_cast<size_t>(rows));
  for (Index i = 0; i < rows; ++i) omega[i] = i;
  RecoveryProblem p{.op = op};
  p.omega = omega;
  p.y = samples;
  p.eta = eta;
  p.controls = controls;
  p.controls.real_coefficients = true;
  InfdimResult out;
  out.result = SolveL1(p);
  out.values = SynthesizeOnGrid(slice.spec, out.result.estimate, eval_grid);
  if (target) {
    RVec ref(eval_grid.size());
    for (Index i = 0; i < eval_grid.size(); ++i) ref[i] = target->eval(eval_grid[i]).real();
    out.error = RelativeErrorPercent(ToComplex(out.values), ToComplex(ref));
  }
  return out;
}

RVec UnitGrid(Index n_half) {
  RVec t(n_half);
  for (Index k = 0; k < n_half; ++k) t[k] = static_cast<double>(k) / static_cast<double>(n_half);
  return t;
}

double GridErrorPercent(const RVec& values, const ContinuousTarget& target, Index n_half) {
  if (values.size() != n_half) throw Error(ErrorCode::kInvalidShape, "values", "need N values");
  const RVec t = UnitGrid(n_half);
  RVec ref(n_half);
  for (Index k = 0; k < n_half; ++k) ref[k] = target.eval(t[k]).real();
  return RelativeErrorPercent(ToComplex(values), ToComplex(ref));
}

Vec DiscreteModelSamples(const ContinuousTarget& target, Index n_half,
                         const std::vector<Index>& centered) {
  const Index two_n = 2 * n_half;
  const Shape s = Shape::D1(two_n);
  Vec x(two_n);
  for (Index k = 0; k < two_n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_half);
    x[k] = t <= target.support ? target.eval(t) / std::sqrt(static_cast<double>(n_half))
                               : Complex(0);
  }
  const Vec full = Compose({CenterFrequencies(s), DftOperator(s)}).apply(x);
  Vec out(static_cast<Index>(centered.size()));
  for (size_t i = 0; i < centered.size(); ++i) out[i] = std::sqrt(2.0) * full[centered[i]];
  return out;
}

InverseCrimeControl RunInverseCrimeControl(const ContinuousTarget& target, Index n_half,
                                           const std::vector<Index>& centered,
                                           const WaveletSpec& periodic, Index terms,
                                           const SolverControls& controls) {
  const Index two_n = 2 * n_half;
  const Shape s = Shape::D1(two_n);
  ValidateShape(s);
  if (terms < 1 || terms > two_n) throw Error(ErrorCode::kInvalidArgument, "terms", "outside [1, 2N]");
  Vec x(two_n);
  for (Index k = 0; k < two_n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n_half);
    x[k] = t <= target.support ? target.eval(t) / std::sqrt(static_cast<double>(n_half))
                               : Complex(0);
  }
  const Operator dwt = DwtOperator(s, periodic);
  Vec c = dwt.apply(x);
  std::vector<Index> order(static_cast<size_t>(two_n));
  for (Index i = 0; i < two_n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(c[a]) > std::abs(c[b]); });
  for (size_t i = static_cast<size_t>(terms); i < order.size(); ++i) c[order[i]] = 0;
  std::vector<Index> omega = centered;
  std::sort(omega.begin(), omega.end());
  const Operator u = Compose({CenterFrequencies(s), DftOperator(s), dwt.adjoint()});
  RecoveryProblem p{.op = u};
  p.omega = omega;
  p.y = Measure(u, omega, c);
  p.synthesis = dwt.adjoint();
  p.truth = dwt.adjoint().apply(c);
  p.controls = controls;
  p.controls.real_coefficients = true;
  InverseCrimeControl out;
  out.result = SolveL1(p);
  out.error = out.result.relative_error.value_or(0.0);
  return out;
}

CrimeBaselines RunCrimeBaselines(const ContinuousTarget& target, Index n_half,
                                 const std::vector<Index>& centered, const Vec& samples,
                                 const WaveletSpec& periodic, const SolverControls& controls,
                                 double eta) {
  const Index two_n = 2 * n_half;
  const Shape s = Shape::D1(two_n);
  ValidateShape(s);
  if (samples.size() != static_cast<Index>(centered.size())) {
    throw Error(ErrorCode::kInvalidShape, "samples", "one sample per map index required");
  }
  CrimeBaselines out;
  Vec filled = Vec::Zero(two_n);
  for (size_t i = 0; i < centered.size(); ++i) filled[centered[i]] = samples[i];
  out.linear = TruncatedFourierSeries(filled).head(n_half).real();
  out.linear_error = GridErrorPercent(out.linear, target, n_half);

  const Operator synthesis = DwtOperator(s, periodic).adjoint();
  RecoveryProblem p{.op = Compose({CenterFrequencies(s), DftOperator(s), synthesis})};
  p.omega = centered;
  std::sort(p.omega.begin(), p.omega.end());
  p.y.resize(samples.size());
  {
    std::vector<size_t> order(centered.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return centered[a] < centered[b]; });
    for (size_t i = 0; i < order.size(); ++i) p.y[i] = samples[order[i]] / std::sqrt(2.0);
  }
  p.eta = eta / std::sqrt(2.0);
  p.synthesis = synthesis;
  p.controls = controls;
  p.controls.real_coefficients = true;
  out.discrete_result = SolveL1(p);
  out.discrete = (out.discrete_result.reconstruction.head(n_half).real()) *
                 std::sqrt(static_cast<double>(n_half));
  out.discrete_error = GridErrorPercent(out.discrete, target, n_half);
  return out;
}

}  // namespace asymcs
