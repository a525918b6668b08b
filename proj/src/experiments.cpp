#include "asymcs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "asymcs/imageio.hpp"
#include "asymcs/phantoms.hpp"

namespace asymcs {
namespace {

RMat SceneAt(const std::string& phantom, const RMat& image, Index n) {
  if (image.size() == 0) return PhantomById(phantom, n);
  if (image.rows() != image.cols() || !IsPowerOfTwo(image.rows())) {
    throw Error(ErrorCode::kInvalidShape, "image", "must be a power-of-two square");
  }
  if (image.rows() < n) {
    throw Error(ErrorCode::kInvalidShape, "image", "smaller than the requested size " +
                                                      std::to_string(n));
  }
  return Downsample(image, image.rows() / n);
}

}  // namespace

SensingKind ParseSensing(const std::string& name) {
  if (name == "dft") return SensingKind::kDft;
  if (name == "hadamard") return SensingKind::kHadamard;
  if (name == "flat") return SensingKind::kFlat;
  throw Error(ErrorCode::kInvalidArgument, "sensing",
              "unknown operator '" + name + "' (dft, hadamard, flat)");
}

std::string ToString(SensingKind kind) {
  switch (kind) {
    case SensingKind::kDft: return "dft";
    case SensingKind::kHadamard: return "hadamard";
    case SensingKind::kFlat: return "flat";
  }
  return "";
}

Operator SensingOperator(SensingKind kind, Index n, std::uint64_t seed) {
  const Shape s = Shape::D2(n);
  ValidateShape(s);
  switch (kind) {
    case SensingKind::kDft: return Compose({CenterFrequencies(s), DftOperator(s)});
    case SensingKind::kHadamard: return FwhtOperator(s, HadamardOrdering::kSequency);
    case SensingKind::kFlat: return ScrambledHadamard(s, seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "sensing", "unknown operator");
}

MapScheme ParseMapScheme(const std::string& name) {
  if (name == "allround") return MapScheme::kAllRound;
  if (name == "uniform") return MapScheme::kUniform;
  if (name == "halfhalf") return MapScheme::kHalfHalf;
  if (name == "full") return MapScheme::kFull;
  throw Error(ErrorCode::kInvalidArgument, "map.scheme",
              "unknown scheme '" + name + "' (allround, uniform, halfhalf, full)");
}

std::string ToString(MapScheme scheme) {
  switch (scheme) {
    case MapScheme::kAllRound: return "allround";
    case MapScheme::kUniform: return "uniform";
    case MapScheme::kHalfHalf: return "halfhalf";
    case MapScheme::kFull: return "full";
  }
  return "";
}

void ValidateMapSpec(const MapSpec& spec) {
  if (spec.scheme == MapScheme::kFull) return;
  if (!(spec.fraction > 0 && spec.fraction <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "map.fraction", "must lie in (0, 1]");
  }
  if (!(spec.first_level_share > 0 && spec.first_level_share <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "map.first_level_share", "must lie in (0, 1]");
  }
  if (spec.scheme == MapScheme::kAllRound) ValidateAllRoundSpec(spec.allround);
}

std::vector<Index> CenteredRadialOrder(Index n) {
  std::vector<Index> order(static_cast<size_t>(n * n));
  std::iota(order.begin(), order.end(), Index{0});
  auto r2 = [n](Index k) {
    const Index dr = k / n - n / 2, dc = k % n - n / 2;
    return dr * dr + dc * dc;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return r2(a) < r2(b); });
  return order;
}

SamplingMap BuildMap(SensingKind kind, const MapSpec& spec, Index n, std::uint64_t seed) {
  ValidateMapSpec(spec);
  const Shape s = Shape::D2(n);
  ValidateShape(s);
  const Index budget = std::max<Index>(1, std::llround(spec.fraction * static_cast<double>(n * n)));
  SamplingMap map;
  switch (spec.scheme) {
    case MapScheme::kFull:
      return FullMap(s);
    case MapScheme::kUniform:
      map = UniformMap(s, budget, seed);
      break;
    case MapScheme::kHalfHalf: {
      const Index first = std::max<Index>(
          1, std::llround(spec.first_level_share * static_cast<double>(budget)));
      const std::vector<Index> order =
          kind == SensingKind::kDft ? CenteredRadialOrder(n) : SquareShellOrder(n);
      map = HalfHalfMap(s, spec.fraction, first, seed, order);
      break;
    }
    case MapScheme::kAllRound: {
      AllRoundSpec a = spec.allround;
      a.b = CalibrateFraction(a, spec.fraction);
      map = AllRoundMap(s, a, seed);
      if (kind != SensingKind::kDft) map = HadamardOrderingAdapter(map);
      break;
    }
  }
  if (kind == SensingKind::kHadamard) map = ForceIndex(map, 0);
  return map;
}

int DefaultWaveletLevels(Index n) { return std::max(1, Log2(n) - 3); }

ImageRecovery RecoverImage(const ImageRecoverySetup& s) {
  const Index n = s.image.rows();
  if (s.image.cols() != n) throw Error(ErrorCode::kInvalidShape, "image", "must be square");
  const Shape shape = Shape::D2(n);
  ValidateShape(shape);
  if (!(s.map.shape == shape)) {
    throw Error(ErrorCode::kInvalidShape, "map", "does not match the image grid");
  }
  WaveletSpec w = s.wavelet;
  if (w.levels == 0) w.levels = DefaultWaveletLevels(n);
  ValidateWaveletSpec(w, n);
  const Operator sensing = SensingOperator(s.sensing, n, s.operator_seed);
  const Operator synthesis = DwtOperator(shape, w).adjoint();
  const Vec x = ImageToVec(s.image);
  RecoveryProblem p{.op = Compose({sensing, synthesis})};
  p.omega = s.map.indices();
  p.y = Measure(sensing, p.omega, x);
  p.eta = s.eta;
  p.synthesis = synthesis;
  p.truth = x;
  p.controls = s.controls;
  p.controls.real_coefficients = true;
  ImageRecovery out;
  out.result = SolveL1(p);
  out.image = VecToImage(out.result.reconstruction, n);
  out.error = out.result.relative_error.value_or(0.0);
  return out;
}

RMat Downsample(const RMat& image, Index factor) {
  if (!IsPowerOfTwo(factor) || image.rows() % factor || image.cols() % factor) {
    throw Error(ErrorCode::kInvalidArgument, "factor", "must be a power of two dividing the size");
  }
  if (factor == 1) return image;
  const Index r = image.rows() / factor, c = image.cols() / factor;
  RMat out(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j)
      out(i, j) = image.block(i * factor, j * factor, factor, factor).mean();
  return out;
}

std::vector<SweepRow> ResolutionSweep(const ResolutionSweepSetup& s) {
  if (s.sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "sizes", "must not be empty");
  ValidateMapSpec(s.map);
  std::vector<SweepRow> rows;
  for (Index n : s.sizes) {
    ValidateShape(Shape::D2(n));
    ImageRecoverySetup r;
    r.image = SceneAt(s.phantom, s.image, n);
    r.sensing = s.sensing;
    r.operator_seed = s.seed;
    r.wavelet = {s.wavelet_order, DefaultWaveletLevels(n), BoundaryMode::kPeriodic};
    r.map = BuildMap(s.sensing, s.map, n, s.seed);
    r.controls = s.controls;
    const ImageRecovery rec = RecoverImage(r);
    rows.push_back({n, r.map.m, r.map.fraction(), rec.error, rec.result.iterations,
                    rec.result.converged});
  }
  return rows;
}

RMat LowpassLinear(const RMat& image, Index low_n) {
  const Index n = image.rows();
  const Shape s = Shape::D2(n);
  ValidateShape(s);
  if (!IsPowerOfTwo(low_n) || low_n > n) {
    throw Error(ErrorCode::kInvalidArgument, "low_n", "must be a power of two <= the image size");
  }
  const Operator f = SensingOperator(SensingKind::kDft, n);
  const Vec full = f.apply(ImageToVec(image));
  Vec kept = Vec::Zero(full.size());
  const Index lo = n / 2 - low_n / 2, hi = n / 2 + low_n / 2;
  for (Index r = lo; r < hi; ++r)
    for (Index c = lo; c < hi; ++c) kept[r * n + c] = full[r * n + c];
  return VecToImage(f.apply_adjoint(kept), n);
}

FixedCountResult FixedCountSweep(const FixedCountSetup& s) {
  if (!(s.low_n < s.high_n)) {
    throw Error(ErrorCode::kInvalidArgument, "low_n", "must be smaller than high_n");
  }
  ValidateShape(Shape::D2(s.low_n));
  ValidateShape(Shape::D2(s.high_n));
  const RMat truth = SceneAt(s.phantom, s.image, s.high_n);
  FixedCountResult out;
  out.samples = s.low_n * s.low_n;
  out.linear = LowpassLinear(truth, s.low_n);
  out.linear_error = RelativeErrorPercent(ImageToVec(out.linear), ImageToVec(truth));
  MapSpec spec = s.map;
  spec.fraction = static_cast<double>(out.samples) / static_cast<double>(s.high_n * s.high_n);
  ImageRecoverySetup r;
  r.image = truth;
  r.wavelet = {s.wavelet_order, DefaultWaveletLevels(s.high_n), BoundaryMode::kPeriodic};
  r.map = BuildMap(SensingKind::kDft, spec, s.high_n, s.seed);
  r.controls = s.controls;
  out.cs = RecoverImage(r);
  return out;
}

}  // namespace asymcs
