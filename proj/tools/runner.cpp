#include "runner.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include "asymcs/coherence.hpp"
#include "asymcs/experiments.hpp"
#include "asymcs/fliptest.hpp"
#include "asymcs/fmsim.hpp"
#include "asymcs/imageio.hpp"
#include "asymcs/infdim.hpp"
#include "asymcs/phantoms.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/sparsity.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs::cli {

namespace fs = std::filesystem;

namespace {

// Reads one JSON object, remembering every field it consumed (with defaults
// filled in) and rejecting fields it does not know.
class Reader {
 public:
  Reader(const Json& json, std::string path) : json_(json), path_(std::move(path)) {
    if (!json_.is_object()) throw Error(ErrorCode::kInvalidArgument, Name(""), "expected an object");
  }

  template <class T>
  T Get(const std::string& key, const T& fallback) {
    used_.insert(key);
    T value = fallback;
    if (json_.contains(key)) {
      try {
        value = json_.at(key).get<T>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kInvalidArgument, Name(key), "expected " + TypeName<T>());
      }
    }
    resolved_[key] = value;
    return value;
  }

  bool Has(const std::string& key) const { return json_.contains(key); }

  Reader Child(const std::string& key) {
    used_.insert(key);
    static const Json kEmpty = Json::object();
    return Reader(json_.contains(key) ? json_.at(key) : kEmpty, Name(key));
  }

  // Stores a finished child's resolved fields under `key`.
  void Adopt(const std::string& key, Reader& child) {
    child.Finish();
    resolved_[key] = child.resolved_;
  }

  void Finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!used_.count(key)) throw Error(ErrorCode::kInvalidArgument, Name(key), "unknown field");
    }
  }

  std::string Name(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json& resolved() const { return resolved_; }

 private:
  template <class T>
  static std::string TypeName() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else return "a list";
  }

  const Json& json_;
  std::string path_;
  std::set<std::string> used_;
  Json resolved_ = Json::object();
};

// Re-labels library validation errors with the config path they came from.
template <class F>
auto Within(const std::string& prefix, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    std::string message = e.what();
    if (!e.field().empty() && message.rfind(e.field() + ": ", 0) == 0) {
      message = message.substr(e.field().size() + 2);
    }
    throw Error(e.code(), e.field().empty() ? prefix : prefix + "." + e.field(), message);
  }
}

void Require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, field, message);
}

Index ReadSide(Reader& r, const std::string& key, Index fallback) {
  const Index n = r.Get<Index>(key, fallback);
  Require(IsPowerOfTwo(n) && n >= 2, r.Name(key), "must be a power of two >= 2");
  return n;
}

// Files written by one run, relative to the output directory.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  std::string Add(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }

  // Maps: the bitmap plus its JSON sidecar.
  void AddMap(const std::string& name, const SamplingMap& map) {
    SaveMap(Add(name), map);
    files_.push_back(name + ".json");
  }

  void WriteJson(const std::string& name, const Json& j) {
    std::ofstream out(Add(name));
    out << j.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::kIo, name, "cannot write");
  }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Result {
  Json metrics = Json::object();
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Shared config blocks.

struct ImageInput {
  RMat image;
  std::string id;
};

ImageInput ReadImage(Reader& r, Index default_n, const std::string& default_phantom) {
  const std::string path = r.Get<std::string>("image", "");
  const std::string phantom = r.Get<std::string>("phantom", default_phantom);
  const Index n = ReadSide(r, "n", default_n);
  const std::string fit = r.Get<std::string>("fit", "crop");
  Require(fit == "crop" || fit == "pad", r.Name("fit"), "must be 'crop' or 'pad'");
  if (path.empty()) {
    return {Within(r.Name("phantom"), [&] { return PhantomById(phantom, n); }), phantom};
  }
  const RMat loaded = Within(r.Name("image"), [&] { return LoadImage(path); });
  RMat square = FitToPowerOfTwo(loaded, fit == "crop" ? FitMode::kCrop : FitMode::kPad);
  Require(n <= square.rows(), r.Name("n"), "larger than the fitted image (" + std::to_string(square.rows()) + ")");
  if (n < square.rows()) square = Downsample(square, square.rows() / n);
  return {square, fs::path(path).filename().string()};
}

BoundaryMode ParseBoundary(const std::string& s, const std::string& field) {
  if (s == "periodic") return BoundaryMode::kPeriodic;
  if (s == "boundary-corrected") return BoundaryMode::kBoundaryCorrected;
  throw Error(ErrorCode::kInvalidArgument, field, "must be 'periodic' or 'boundary-corrected'");
}

// levels 0 selects the default depth for side n.
WaveletSpec ReadWavelet(Reader& parent, Index n, WaveletSpec fallback, bool default_depth) {
  Reader r = parent.Child("wavelet");
  WaveletSpec w;
  w.order = r.Get<int>("order", fallback.order);
  w.levels = r.Get<int>("levels", default_depth ? 0 : fallback.levels);
  w.boundary = ParseBoundary(
      r.Get<std::string>("boundary", fallback.boundary == BoundaryMode::kPeriodic ? "periodic" : "boundary-corrected"),
      r.Name("boundary"));
  if (w.levels == 0) w.levels = default_depth ? DefaultWaveletLevels(n) : fallback.levels;
  Within(r.Name(""), [&] { ValidateWaveletSpec(w, n); });
  parent.Adopt("wavelet", r);
  return w;
}

MapSpec ReadMap(Reader& parent, MapSpec fallback) {
  Reader r = parent.Child("map");
  MapSpec m;
  m.scheme = Within(r.Name("scheme"), [&] { return ParseMapScheme(r.Get<std::string>("scheme", ToString(fallback.scheme))); });
  m.fraction = r.Get<double>("fraction", fallback.fraction);
  m.allround.n_regions = r.Get<int>("regions", fallback.allround.n_regions);
  m.allround.m_radius = r.Get<double>("inner_radius", fallback.allround.m_radius);
  m.allround.a = r.Get<double>("exponent", fallback.allround.a);
  m.first_level_share = r.Get<double>("first_level_share", fallback.first_level_share);
  parent.Adopt("map", r);
  return m;
}

SolverControls ReadSolver(Reader& parent, int iterations) {
  Reader r = parent.Child("solver");
  SolverControls c;
  c.max_iterations = r.Get<int>("max_iterations", iterations);
  c.tolerance = r.Get<double>("tolerance", 1e-6);
  c.log_every = r.Get<int>("log_every", 10);
  Require(c.max_iterations >= 1, r.Name("max_iterations"), "must be >= 1");
  Require(c.tolerance >= 0, r.Name("tolerance"), "must be >= 0");
  Require(c.log_every >= 0, r.Name("log_every"), "must be >= 0");
  parent.Adopt("solver", r);
  return c;
}

SensingKind ReadSensing(Reader& r, const std::string& fallback) {
  return Within(r.Name("sensing"), [&] { return ParseSensing(r.Get<std::string>("sensing", fallback)); });
}

Json RecoveryJson(const RecoveryResult& r) {
  Json j;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["objective"] = r.objective;
  j["residual"] = r.residual;
  return j;
}

void WriteRecoveryLog(Artifacts& a, const std::string& name, const RecoveryResult& r) {
  if (!r.log.empty()) WriteIterationLog(a.Add(name), r);
}

// ---------------------------------------------------------------------------
// Experiments. Each reads its block of the config, then runs.

Result Coherence(Reader& r, std::uint64_t, Artifacts& a) {
  const Index n = ReadSide(r, "n", 256);
  const std::string sensing = r.Get<std::string>("sensing", "dft");
  Require(sensing == "dft" || sensing == "hadamard", r.Name("sensing"), "must be 'dft' or 'hadamard'");
  const WaveletSpec w = ReadWavelet(r, n, {sensing == "dft" ? 3 : 1, 0, BoundaryMode::kPeriodic}, true);
  const int bands = r.Get<int>("bands", 4);
  Require(bands >= 1 && (Index{1} << (bands - 1)) <= n, r.Name("bands"), "need 1 <= bands and 2^(bands-1) <= n");
  std::vector<Index> k_grid = r.Get<std::vector<Index>>("k_grid", {0, n / 16, n / 8, n / 4, n / 2});
  for (Index k : k_grid) Require(k >= 0 && k < n, r.Name("k_grid"), "entries must lie in [0, n)");
  r.Finish();

  const Shape s = Shape::D1(n);
  const Operator synthesis = DwtOperator(s, w).adjoint();
  // DFT rows ordered by |frequency| so that leading rows are low frequencies.
  const Operator u = sensing == "dft"
                         ? Compose({FrequencyMagnitudeOrder(n), DftOperator(s), synthesis})
                         : Compose({FwhtOperator(s, HadamardOrdering::kSequency), synthesis});
  const LevelStructure levels = LevelStructure::Dyadic(n, bands);
  const CoherenceReport report = AnalyzeCoherence(u, levels, levels, k_grid);
  WriteHeatmapPgm(a.Add("local_coherence.pgm"), report.local);
  WriteMatrixCsv(a.Add("local_coherence.csv"), report.local);
  WriteTailCsv(a.Add("tail.csv"), report.tail);
  Result out;
  out.metrics["global_coherence"] = report.global;
  out.metrics["tail_row"] = report.tail.row;
  out.metrics["tail_col"] = report.tail.col;
  return out;
}

Result Sparsity(Reader& r, std::uint64_t, Artifacts& a) {
  const ImageInput in = ReadImage(r, 256, "geometric");
  const Index n = in.image.rows();
  const WaveletSpec w = ReadWavelet(r, n, {8, 4, BoundaryMode::kPeriodic}, false);
  const std::vector<double> eps = r.Get<std::vector<double>>("epsilons", {0.5, 0.8, 0.9, 0.95, 0.99});
  r.Finish();
  const SparsityProfile p = Within("epsilons", [&] { return SparsityCurve(ImageToVec(in.image), Shape::D2(n), w, eps); });
  WriteSparsityCsv(a.Add("sparsity.csv"), p);
  Result out;
  Json rows = Json::array();
  for (size_t e = 0; e < eps.size(); ++e) {
    std::vector<double> rel(static_cast<size_t>(p.levels.count()));
    for (int k = 0; k < p.levels.count(); ++k) rel[k] = p.relative(static_cast<Index>(e), k);
    rows.push_back({{"epsilon", eps[e]}, {"relative", rel}});
  }
  out.metrics["image"] = in.id;
  out.metrics["relative_sparsity"] = rows;
  return out;
}

Result Flip(Reader& r, std::uint64_t seed, Artifacts& a) {
  const ImageInput in = ReadImage(r, 128, "geometric");
  const Index n = in.image.rows();
  const SensingKind kind = ReadSensing(r, "dft");
  const WaveletSpec w = ReadWavelet(r, n, {4, 0, BoundaryMode::kPeriodic}, true);
  const MapSpec ms = ReadMap(r, {MapScheme::kAllRound, 0.125});
  const double eta = r.Get<double>("eta", 0.0);
  const SolverControls c = ReadSolver(r, 500);
  r.Finish();
  const Shape s = Shape::D2(n);
  FlipTestSetup setup{.signal = ImageToVec(in.image),
                      .sensing = SensingOperator(kind, n, seed),
                      .analysis = DwtOperator(s, w),
                      .map = Within("map", [&] { return BuildMap(kind, ms, n, seed); })};
  setup.eta = eta;
  setup.controls = c;
  setup.controls.real_coefficients = true;
  setup.image_id = in.id;
  const FlipReport rep = Within("", [&] { return RunFlipTest(setup); });
  SaveImage(a.Add("direct.png"), VecToImage(rep.reconstruction_direct, n));
  SaveImage(a.Add("flipped.png"), VecToImage(rep.reconstruction_flipped, n));
  a.AddMap("map.pbm", setup.map);
  WriteFlipReport(a.Add("report.json"), rep);
  WriteRecoveryLog(a, "log_direct.csv", rep.direct);
  WriteRecoveryLog(a, "log_flipped.csv", rep.flipped);
  Result out;
  out.metrics["error_direct"] = rep.error_direct;
  out.metrics["error_flipped"] = rep.error_flipped;
  out.metrics["ratio"] = rep.ratio ? Json(*rep.ratio) : Json(nullptr);
  out.converged = rep.direct.converged && rep.flipped.converged;
  return out;
}

Result TvFlip(Reader& r, std::uint64_t seed, Artifacts& a) {
  const ImageInput in = ReadImage(r, 64, "tv");
  const Index n = in.image.rows();
  MapSpec fallback{MapScheme::kAllRound, 0.125};
  fallback.allround.n_regions = 20;
  const MapSpec ms = ReadMap(r, fallback);
  const double eta = r.Get<double>("eta", 0.0);
  const SolverControls c = ReadSolver(r, 2000);
  r.Finish();
  TvFlipSetup setup{.image = in.image, .map = Within("map", [&] { return BuildMap(SensingKind::kDft, ms, n, seed); })};
  setup.eta = eta;
  setup.twin_seed = seed;
  setup.controls = c;
  setup.image_id = in.id;
  const TvFlipReport rep = Within("", [&] { return RunTvFlipTest(setup); });
  SaveImage(a.Add("twin.png"), rep.twin.image);
  SaveImage(a.Add("direct.png"), VecToImage(rep.report.reconstruction_direct, n));
  SaveImage(a.Add("flipped.png"), VecToImage(rep.report.reconstruction_flipped, n));
  a.AddMap("map.pbm", setup.map);
  WriteFlipReport(a.Add("report.json"), rep.report);
  Result out;
  out.metrics["error_original"] = rep.report.error_direct;
  out.metrics["error_twin"] = rep.report.error_flipped;
  out.metrics["certificate_holds"] = rep.twin.certificate.holds;
  out.metrics["tv_relative_gap"] = rep.twin.certificate.tv_relative_gap;
  out.converged = rep.report.direct.converged && rep.report.flipped.converged;
  return out;
}

Result Recover(Reader& r, std::uint64_t seed, Artifacts& a) {
  const ImageInput in = ReadImage(r, 128, "geometric");
  const Index n = in.image.rows();
  const SensingKind kind = ReadSensing(r, "dft");
  const WaveletSpec w = ReadWavelet(r, n, {4, 0, BoundaryMode::kPeriodic}, true);
  const MapSpec ms = ReadMap(r, {MapScheme::kAllRound, 0.125});
  const double eta = r.Get<double>("eta", 0.0);
  const SolverControls c = ReadSolver(r, 500);
  r.Finish();
  ImageRecoverySetup setup{.image = in.image, .sensing = kind, .operator_seed = seed, .wavelet = w};
  setup.map = Within("map", [&] { return BuildMap(kind, ms, n, seed); });
  setup.eta = eta;
  setup.controls = c;
  const ImageRecovery rec = Within("", [&] { return RecoverImage(setup); });
  SaveImage(a.Add("reconstruction.png"), rec.image);
  a.AddMap("map.pbm", setup.map);
  WriteRecoveryLog(a, "log.csv", rec.result);
  Result out;
  out.metrics["image"] = in.id;
  out.metrics["m"] = setup.map.m;
  out.metrics["fraction"] = setup.map.fraction();
  out.metrics["error"] = rec.error;
  out.metrics["solver"] = RecoveryJson(rec.result);
  out.converged = rec.result.converged;
  return out;
}

Result FmSim(Reader& r, std::uint64_t seed, Artifacts& a) {
  const ImageInput in = ReadImage(r, 128, "geometric");
  const Index n = in.image.rows();
  const PsfSpec psf{r.Get<double>("psf_cutoff", 0.2)};
  Within("psf_cutoff", [&] { ValidatePsf(psf); });
  const double budget = r.Get<double>("budget", 1e6);
  Require(budget > 0, r.Name("budget"), "must be > 0");
  const MapSpec ms = ReadMap(r, {MapScheme::kAllRound, 0.0625});
  const WaveletSpec w = ReadWavelet(r, n, {4, 0, BoundaryMode::kPeriodic}, true);
  const std::string mode = r.Get<std::string>("mode", "full");
  Require(mode == "full" || mode == "hadamard", r.Name("mode"), "must be 'full' or 'hadamard'");
  const double eta = r.Get<double>("eta", -1.0);
  const bool noise = r.Get<bool>("noise", true);
  const bool baseline = r.Get<bool>("baseline", false);
  const SolverControls c = ReadSolver(r, 2000);
  r.Finish();

  const SamplingMap map = Within("map", [&] { return BuildMap(SensingKind::kHadamard, ms, n, seed); });
  MeasurementSet m = ForwardModel(in.image, psf, map, budget);
  if (noise) m.counts = PoissonSample(m.gamma, seed);
  const CfmRecovery rec = RecoverCfm(m, psf, w, mode == "full" ? CfmMode::kFullChain : CfmMode::kHadamardOnly,
                                     eta, c, &in.image);
  RVec counts(static_cast<Index>(m.counts.size()));
  for (size_t i = 0; i < m.counts.size(); ++i) counts[static_cast<Index>(i)] = static_cast<double>(m.counts[i]);
  SaveImage(a.Add("reconstruction.png"), rec.image);
  a.AddMap("map.pbm", map);
  WriteBinaryArray(a.Add("gamma.bin"), m.gamma);
  WriteBinaryArray(a.Add("y.bin"), counts);
  WriteBinaryArray(a.Add("y_corrected.bin"), CorrectMeasurements(m));
  WriteRecoveryLog(a, "log.csv", rec.result);
  Result out;
  out.metrics["m"] = map.m;
  out.metrics["photon_scale"] = m.scale;
  out.metrics["eta"] = eta < 0 ? CorrectedNoiseRadius(m) : eta;
  out.metrics["error"] = *rec.error;
  out.metrics["solver"] = RecoveryJson(rec.result);
  out.converged = rec.result.converged;
  if (baseline) {
    BaselineSetup b{.x = in.image, .psf = psf, .fraction = ms.fraction, .budget = budget, .wavelet = w, .seed = seed};
    b.controls = c;
    const BaselineRecovery base = Within("", [&] { return InitialApproachBaseline(b); });
    SaveImage(a.Add("baseline.png"), base.recovery.image);
    out.metrics["baseline_error"] = *base.recovery.error;
    out.metrics["baseline_solver"] = RecoveryJson(base.recovery.result);
    out.converged = out.converged && base.recovery.result.converged;
  }
  return out;
}

Result Infdim(Reader& r, std::uint64_t seed, Artifacts& a) {
  const std::string target_id = r.Get<std::string>("target", "expcos2");
  const ContinuousTarget target = Within(r.Name("target"), [&] { return TargetById(target_id); });
  const Index n = ReadSide(r, "n_half", 512);
  Reader mr = r.Child("map");
  AllRoundSpec spec{mr.Get<int>("regions", 20), mr.Get<double>("inner_radius", 0.02), mr.Get<double>("exponent", 2.0),
                    1.0};
  const double fraction = mr.Get<double>("fraction", 0.06);
  r.Adopt("map", mr);
  Reader sr = r.Child("slice");
  SliceSpec slice;
  slice.wavelet.order = sr.Get<int>("order", 6);
  slice.wavelet.levels = sr.Get<int>("levels", 10);
  slice.wavelet.boundary = ParseBoundary(sr.Get<std::string>("boundary", "boundary-corrected"), sr.Name("boundary"));
  slice.columns = sr.Get<Index>("columns", 512);
  slice.fine_log2 = sr.Get<int>("fine_log2", 14);
  const std::string cache = sr.Get<std::string>("cache_dir", "");
  Within(sr.Name(""), [&] { ValidateSliceSpec(slice); });
  r.Adopt("slice", sr);
  Reader br = r.Child("baseline");
  const WaveletSpec periodic{br.Get<int>("order", 6), br.Get<int>("levels", 6), BoundaryMode::kPeriodic};
  Within(br.Name(""), [&] { ValidateWaveletSpec(periodic, 2 * n); });
  const Index crime_terms = br.Get<Index>("inverse_crime_terms", 0);
  r.Adopt("baseline", br);
  const double eta = r.Get<double>("eta", 0.0);
  const SolverControls c = ReadSolver(r, 2000);
  r.Finish();

  spec.b = Within("map", [&] { return CalibrateFraction(spec, fraction, true); });
  const SamplingMap map = AllRoundMap(Shape::D1(2 * n), spec, seed);
  const std::vector<Index> idx = map.indices();
  const std::vector<double> w = HalfIntegerFrequencies(n, idx);
  const Vec y = ContinuousFourierSamples(target, w);
  const SynthesisMatrixSlice s = BuildSynthesisSlice(slice, w, cache);
  const RVec grid = UnitGrid(n);
  const InfdimResult inf = SolveInfdim(s, y, eta, c, grid, &target);
  const CrimeBaselines base = RunCrimeBaselines(target, n, idx, y, periodic, c, eta);
  const Index terms = crime_terms > 0 ? crime_terms : std::max<Index>(1, static_cast<Index>(idx.size()) / 4);
  const InverseCrimeControl crime = RunInverseCrimeControl(target, n, idx, periodic, terms, c);
  {
    std::ofstream out(a.Add("values.csv"));
    out << std::setprecision(17) << "t,target,infdim,discrete,linear\n";
    for (Index k = 0; k < n; ++k) {
      out << grid[k] << "," << target.eval(grid[k]).real() << "," << inf.values[k] << "," << base.discrete[k] << ","
          << base.linear[k] << "\n";
    }
  }
  a.AddMap("map.pbm", map);
  WriteRecoveryLog(a, "log.csv", inf.result);
  Result out;
  out.metrics["m"] = map.m;
  out.metrics["fraction"] = map.fraction();
  out.metrics["error_infdim"] = *inf.error;
  out.metrics["error_discrete"] = base.discrete_error;
  out.metrics["error_linear"] = base.linear_error;
  out.metrics["error_inverse_crime"] = crime.error;
  out.metrics["solver"] = RecoveryJson(inf.result);
  out.converged = inf.result.converged;
  return out;
}

Result Resolution(Reader& r, std::uint64_t seed, Artifacts& a) {
  ResolutionSweepSetup s;
  const std::string path = r.Get<std::string>("image", "");
  s.phantom = r.Get<std::string>("phantom", "geometric");
  if (!path.empty()) s.image = Within(r.Name("image"), [&] { return FitToPowerOfTwo(LoadImage(path), FitMode::kCrop); });
  s.sizes = r.Get<std::vector<Index>>("sizes", {64, 128, 256});
  for (Index n : s.sizes) Require(IsPowerOfTwo(n) && n >= 8, r.Name("sizes"), "entries must be powers of two >= 8");
  s.sensing = ReadSensing(r, "dft");
  s.map = ReadMap(r, {MapScheme::kAllRound, 0.0625});
  s.wavelet_order = r.Get<int>("wavelet_order", 4);
  s.controls = ReadSolver(r, 500);
  s.controls.log_every = 0;
  s.seed = seed;
  r.Finish();
  const std::vector<SweepRow> rows = Within("", [&] { return ResolutionSweep(s); });
  std::ofstream csv(a.Add("sweep.csv"));
  csv << std::setprecision(17) << "resolution,m,fraction,error,iterations,converged\n";
  Result out;
  Json jr = Json::array();
  for (const SweepRow& row : rows) {
    csv << row.n << "," << row.m << "," << row.fraction << "," << row.error << "," << row.iterations << ","
        << (row.converged ? 1 : 0) << "\n";
    jr.push_back({{"resolution", row.n}, {"m", row.m}, {"error", row.error}, {"converged", row.converged}});
    out.converged = out.converged && row.converged;
  }
  bool decreasing = true;
  for (size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].error < rows[i - 1].error;
  out.metrics["rows"] = jr;
  out.metrics["strictly_decreasing"] = decreasing;
  return out;
}

Result FixedCount(Reader& r, std::uint64_t seed, Artifacts& a) {
  FixedCountSetup s;
  const std::string path = r.Get<std::string>("image", "");
  s.phantom = r.Get<std::string>("phantom", "geometric");
  s.low_n = ReadSide(r, "low_n", 64);
  s.high_n = ReadSide(r, "high_n", 256);
  Require(s.low_n < s.high_n, r.Name("low_n"), "must be smaller than high_n");
  if (!path.empty()) {
    s.image = Within(r.Name("image"), [&] { return FitToPowerOfTwo(LoadImage(path), FitMode::kCrop); });
    Require(s.image.rows() >= s.high_n, r.Name("high_n"), "larger than the fitted image");
    if (s.image.rows() > s.high_n) s.image = Downsample(s.image, s.image.rows() / s.high_n);
  }
  s.map = ReadMap(r, {MapScheme::kAllRound, 0.0});
  s.wavelet_order = r.Get<int>("wavelet_order", 4);
  s.controls = ReadSolver(r, 500);
  s.seed = seed;
  r.Finish();
  const FixedCountResult f = Within("", [&] { return FixedCountSweep(s); });
  SaveImage(a.Add("linear.png"), f.linear);
  SaveImage(a.Add("cs.png"), f.cs.image);
  WriteRecoveryLog(a, "log.csv", f.cs.result);
  Result out;
  out.metrics["samples"] = f.samples;
  out.metrics["linear_error"] = f.linear_error;
  out.metrics["cs_error"] = f.cs.error;
  out.metrics["cs_beats_linear"] = f.cs.error < f.linear_error;
  out.metrics["solver"] = RecoveryJson(f.cs.result);
  out.converged = f.cs.result.converged;
  return out;
}

using Experiment = Result (*)(Reader&, std::uint64_t, Artifacts&);

const std::vector<std::pair<std::string, Experiment>>& Registry() {
  static const std::vector<std::pair<std::string, Experiment>> kRegistry = {
      {"coherence", Coherence},
      {"sparsity", Sparsity},
      {"flip", Flip},
      {"tvflip", TvFlip},
      {"recover", Recover},
      {"fmsim", FmSim},
      {"infdim", Infdim},
      {"resolution-sweep", Resolution},
      {"fixed-count-sweep", FixedCount},
  };
  return kRegistry;
}

bool IsValidationCode(ErrorCode code) {
  return code == ErrorCode::kInvalidShape || code == ErrorCode::kInvalidArgument ||
         code == ErrorCode::kOutOfRange || code == ErrorCode::kInfeasible || code == ErrorCode::kIo;
}

}  // namespace

const std::vector<std::string>& ExperimentKinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, fn] : Registry()) k.push_back(name);
    return k;
  }();
  return kinds;
}

std::string Sha256File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path, "cannot read for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof(buffer));
    EVP_DigestUpdate(ctx, buffer, static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

RunOutcome Run(const RunRequest& request) {
  RunOutcome outcome;
  Experiment experiment = nullptr;
  for (const auto& [name, fn] : Registry()) {
    if (name == request.kind) experiment = fn;
  }
  if (!experiment) {
    outcome.status = kExitValidation;
    outcome.message = "experiment: unknown kind '" + request.kind + "'";
    return outcome;
  }
  try {
    Reader root(request.config, "");
    const std::string declared = root.Get<std::string>("experiment", request.kind);
    Require(declared == request.kind, "experiment", "config is for '" + declared + "', not '" + request.kind + "'");
    std::uint64_t seed = root.Get<std::uint64_t>("seed", 1);
    if (request.seed) seed = *request.seed;
    std::string out_dir = root.Get<std::string>("out", "out/" + request.kind);
    if (request.out) out_dir = *request.out;
    Json resolved_head = Json::object();
    resolved_head["experiment"] = request.kind;
    resolved_head["seed"] = seed;
    resolved_head["out"] = out_dir;

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "out", "cannot create '" + out_dir + "': " + ec.message());
    Artifacts artifacts(out_dir);
    const Result result = experiment(root, seed, artifacts);

    Json config = resolved_head;
    for (const auto& [key, value] : root.resolved().items()) {
      if (!config.contains(key)) config[key] = value;
    }
    artifacts.WriteJson("config.json", config);
    Json files = Json::array();
    for (const std::string& f : artifacts.files()) {
      const fs::path p = artifacts.dir() / f;
      files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", Sha256File(p.string())}});
    }
    Json manifest;
    manifest["experiment"] = request.kind;
    manifest["seed"] = seed;
    manifest["status"] = result.converged ? "ok" : "not_converged";
    manifest["flags"] = {{"converged", result.converged}};
    manifest["metrics"] = result.metrics;
    manifest["files"] = files;
    std::ofstream mf(artifacts.dir() / "manifest.json");
    mf << manifest.dump(2) << "\n";
    if (!mf) throw Error(ErrorCode::kIo, "out", "cannot write manifest.json");
    outcome.manifest = manifest;
    outcome.status = result.converged ? kExitSuccess : kExitNotConverged;
    if (!result.converged) outcome.message = "solver did not reach its tolerance; artifacts written";
  } catch (const Error& e) {
    outcome.status = IsValidationCode(e.code()) ? kExitValidation : kExitFailure;
    outcome.message = std::string(outcome.status == kExitValidation ? "validation error: " : "error: ") + e.what();
  } catch (const std::exception& e) {
    outcome.status = kExitFailure;
    outcome.message = std::string("error: ") + e.what();
  }
  return outcome;
}

}  // namespace asymcs::cli
