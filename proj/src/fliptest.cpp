#include "asymcs/fliptest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

namespace asymcs {
namespace {

using json = nlohmann::ordered_json;

json MapJson(const SamplingMap& map) {
  json j;
  j["scheme"] = map.scheme;
  j["shape"] = map.shape.str();
  j["m"] = map.m;
  j["seed"] = map.seed;
  json params = json::object();
  for (const auto& [k, v] : map.params) params[k] = v;
  j["params"] = params;
  return j;
}

void FillRatio(FlipReport& r) {
  if (r.error_direct > 0) r.ratio = r.error_flipped / r.error_direct;
}

// Roots v of the magnitude equation at one pixel, given the fixed lower (a)
// and right (b) neighbours; absent neighbours contribute no difference.
std::vector<double> Roots(std::optional<double> a, std::optional<double> b, double t) {
  std::vector<double> v;
  if (a && b) {
    const double d = 2 * t * t - (*a - *b) * (*a - *b);
    if (d < 0) return v;
    const double mid = 0.5 * (*a + *b), half = 0.5 * std::sqrt(d);
    v = {mid - half, mid + half};
  } else if (a || b) {
    const double base = a ? *a : *b;
    v = {base - t, base + t};
  }
  std::erase_if(v, [](double x) { return x < 0.0 || x > 1.0; });
  return v;
}

std::optional<RMat> TryConstruct(const RMat& image, const std::vector<double>& nonzero,
                                 std::mt19937_64& rng) {
  const Index n = image.rows();
  const Index p = static_cast<Index>(nonzero.size());
  std::vector<double> pool = nonzero;
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_int_distribution<int> coin(0, 1);

  // The bottom-right pixel always has magnitude 0, so the region of nonzero
  // magnitudes (the first p raster positions) never contains it. Pixels
  // outside that region all take the value c, which makes their magnitude 0.
  const double c = image(n - 1, n - 1);
  RMat out = RMat::Constant(n, n, c);
  size_t cursor = 0;
  for (Index k = p - 1; k >= 0; --k) {
    const Index i = k / n, j = k % n;
    std::optional<double> a, b;
    if (i + 1 < n) a = out(i + 1, j);
    if (j + 1 < n) b = out(i, j + 1);
    // The left neighbour's lower partner is already fixed: prefer the root
    // closest to it so the next pixel sees nearly equal neighbours.
    std::optional<double> partner;
    if (j > 0 && i + 1 < n) partner = out(i + 1, j - 1);
    bool placed = false;
    for (size_t q = cursor; q < pool.size() && !placed; ++q) {
      std::vector<double> roots = Roots(a, b, pool[q]);
      if (roots.empty()) continue;
      double v = roots[0];
      if (roots.size() == 2) {
        if (partner) {
          v = std::abs(roots[0] - *partner) <= std::abs(roots[1] - *partner) ? roots[0] : roots[1];
        } else {
          v = roots[coin(rng)];
        }
      }
      std::swap(pool[cursor], pool[q]);
      ++cursor;
      out(i, j) = v;
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  return out;
}

}  // namespace

Vec Flip(const Vec& x) { return x.reverse(); }

FlipReport RunFlipTest(const FlipTestSetup& s) {
  if (s.signal.size() != s.analysis.cols()) {
    throw Error(ErrorCode::kInvalidShape, "signal", "length does not match the analysis operator");
  }
  if (s.sensing.cols() != s.signal.size()) {
    throw Error(ErrorCode::kInvalidShape, "sensing", "input size does not match the signal");
  }
  if (static_cast<Index>(s.map.mask.size()) != s.sensing.rows()) {
    throw Error(ErrorCode::kInvalidShape, "map", "does not match the sensing output grid");
  }
  const Operator synthesis = s.analysis.adjoint();
  const Operator u = Compose({s.sensing, synthesis});
  const std::vector<Index> omega = s.map.indices();
  const Vec coeffs = s.analysis.apply(s.signal);

  auto solve = [&](const Vec& c) {
    RecoveryProblem p{.op = u};
    p.omega = omega;
    p.y = Measure(u, omega, c);
    p.eta = s.eta;
    p.controls = s.controls;
    return SolveL1(p);
  };
  FlipReport r;
  r.direct = solve(coeffs);
  r.flipped = solve(Flip(coeffs));
  r.reconstruction_direct = synthesis.apply(r.direct.estimate);
  r.reconstruction_flipped = synthesis.apply(Flip(r.flipped.estimate));
  Vec ref = s.signal, rd = r.reconstruction_direct, rf = r.reconstruction_flipped;
  if (s.controls.real_coefficients) {
    ref = ref.real().cast<Complex>();
    rd = rd.real().cast<Complex>();
    rf = rf.real().cast<Complex>();
  }
  r.error_direct = RelativeErrorPercent(rd, ref);
  r.error_flipped = RelativeErrorPercent(rf, ref);
  FillRatio(r);

  json j;
  j["test"] = "flip";
  j["image"] = s.image_id;
  j["sensing"] = s.sensing.kind();
  j["analysis"] = s.analysis.kind();
  j["map"] = MapJson(s.map);
  j["eta"] = s.eta;
  j["max_iterations"] = s.controls.max_iterations;
  r.config = j.dump();
  return r;
}

GradientCertificate CertifyGradientPermutation(const RMat& original, const RMat& twin) {
  if (original.rows() != twin.rows() || original.cols() != twin.cols()) {
    throw Error(ErrorCode::kInvalidShape, "twin", "size differs from the original");
  }
  RVec g0 = GradientMagnitudes(original), g1 = GradientMagnitudes(twin);
  GradientCertificate c;
  c.tv_in = g0.sum();
  c.tv_out = g1.sum();
  c.nonzero_in = (g0.array() > 0).count();
  c.nonzero_out = (g1.array() > 0).count();
  std::sort(g0.begin(), g0.end());
  std::sort(g1.begin(), g1.end());
  c.max_magnitude_gap = g0.size() ? (g0 - g1).cwiseAbs().maxCoeff() : 0.0;
  c.tv_relative_gap = c.tv_in > 0 ? std::abs(c.tv_out - c.tv_in) / c.tv_in : std::abs(c.tv_out);
  c.holds = c.max_magnitude_gap <= 1e-6 && c.tv_relative_gap <= 5e-3 &&
            c.nonzero_in == c.nonzero_out;
  return c;
}

PermutedGradientImage MakePermutedGradientImage(const RMat& image, std::uint64_t seed,
                                                int max_attempts) {
  if (image.rows() != image.cols() || image.rows() < 2) {
    throw Error(ErrorCode::kInvalidShape, "image", "must be square with side >= 2");
  }
  if (image.minCoeff() < 0.0 || image.maxCoeff() > 1.0) {
    throw Error(ErrorCode::kOutOfRange, "image", "values must lie in [0, 1]");
  }
  if (max_attempts < 1) throw Error(ErrorCode::kInvalidArgument, "max_attempts", "must be >= 1");
  PermutedGradientImage out;
  if (seed == 0) {
    out.image = image;
    out.attempts = 1;
    out.certificate = CertifyGradientPermutation(image, image);
    return out;
  }
  const RVec g = GradientMagnitudes(image);
  std::vector<double> nonzero;
  for (Index k = 0; k < g.size(); ++k)
    if (g[k] > 0) nonzero.push_back(g[k]);
  std::mt19937_64 rng(seed);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const std::uint64_t s = rng();
    std::mt19937_64 local(s);
    std::optional<RMat> twin = TryConstruct(image, nonzero, local);
    if (!twin) continue;
    GradientCertificate cert = CertifyGradientPermutation(image, *twin);
    if (!cert.holds) continue;
    out.image = std::move(*twin);
    out.certificate = cert;
    out.seed = s;
    out.attempts = attempt;
    return out;
  }
  throw Error(ErrorCode::kConstruction, "seed",
              "no certified permuted-gradient image after " + std::to_string(max_attempts) +
                  " attempts");
}

TvFlipReport RunTvFlipTest(const TvFlipSetup& s) {
  const Index n = s.image.rows();
  const Shape shape = Shape::D2(n);
  if (!(s.map.shape == shape)) {
    throw Error(ErrorCode::kInvalidShape, "map", "does not match the image grid");
  }
  TvFlipReport out;
  out.twin = MakePermutedGradientImage(s.image, s.twin_seed);
  const Operator f = Compose({CenterFrequencies(shape), DftOperator(shape)});
  const std::vector<Index> omega = s.map.indices();
  auto solve = [&](const RMat& img) {
    Vec x(n * n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) x[i * n + j] = img(i, j);
    TvProblem p;
    p.n = n;
    p.omega = omega;
    p.y = Measure(f, omega, x);
    p.eta = s.eta;
    p.truth = x;
    p.controls = s.controls;
    return SolveTv(p);
  };
  FlipReport& r = out.report;
  r.direct = solve(s.image);
  r.flipped = solve(out.twin.image);
  r.reconstruction_direct = r.direct.reconstruction;
  r.reconstruction_flipped = r.flipped.reconstruction;
  r.error_direct = r.direct.relative_error.value_or(0.0);
  r.error_flipped = r.flipped.relative_error.value_or(0.0);
  FillRatio(r);
  json j;
  j["test"] = "tvflip";
  j["image"] = s.image_id;
  j["map"] = MapJson(s.map);
  j["eta"] = s.eta;
  j["twin_seed"] = s.twin_seed;
  j["twin_attempt_seed"] = out.twin.seed;
  j["certificate"] = {{"max_magnitude_gap", out.twin.certificate.max_magnitude_gap},
                      {"tv_in", out.twin.certificate.tv_in},
                      {"tv_out", out.twin.certificate.tv_out},
                      {"nonzero_in", out.twin.certificate.nonzero_in},
                      {"nonzero_out", out.twin.certificate.nonzero_out},
                      {"holds", out.twin.certificate.holds}};
  j["max_iterations"] = s.controls.max_iterations;
  r.config = j.dump();
  return out;
}

void WriteFlipReport(const std::string& path, const FlipReport& r) {
  json j;
  j["error_direct"] = r.error_direct;
  j["error_flipped"] = r.error_flipped;
  j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
  j["config"] = json::parse(r.config.empty() ? "{}" : r.config);
  j["direct"] = {{"iterations", r.direct.iterations}, {"converged", r.direct.converged}};
  j["flipped"] = {{"iterations", r.flipped.iterations}, {"converged", r.flipped.converged}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, path, "cannot open for writing");
  out << j.dump(2) << "\n";
}

}  // namespace asymcs
