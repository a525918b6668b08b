#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "asymcs/coherence.hpp"
#include "asymcs/core.hpp"
#include "asymcs/experiments.hpp"
#include "asymcs/fliptest.hpp"
#include "asymcs/fmsim.hpp"
#include "asymcs/imageio.hpp"
#include "asymcs/infdim.hpp"
#include "asymcs/levels.hpp"
#include "asymcs/phantoms.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/sparsity.hpp"
#include "asymcs/transforms.hpp"
#include "asymcs/wavelets.hpp"

namespace py = pybind11;
using namespace asymcs;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

// A 1D array is a length-n signal, a 2D square array an n x n grid stored
// row-major; both are flattened into the library's vector layout.
std::pair<Vec, Shape> Flatten(const CArray& a, const char* field) {
  if (a.ndim() == 1) {
    return {Eigen::Map<const Vec>(a.data(), a.shape(0)), Shape::D1(a.shape(0))};
  }
  if (a.ndim() == 2 && a.shape(0) == a.shape(1)) {
    return {Eigen::Map<const Vec>(a.data(), a.size()), Shape::D2(a.shape(0))};
  }
  throw Error(ErrorCode::kInvalidShape, field, "expected a 1D array or a square 2D array");
}

CArray Unflatten(const Vec& v, const Shape& s) {
  CArray out = s.rank == 1 ? CArray({s.n}) : CArray({s.n, s.n});
  std::copy(v.data(), v.data() + v.size(), out.mutable_data());
  return out;
}

Direction ParseDirection(bool inverse) { return inverse ? Direction::kInverse : Direction::kForward; }

HadamardOrdering ParseOrdering(const std::string& name) {
  if (name == "natural") return HadamardOrdering::kNatural;
  if (name == "sequency") return HadamardOrdering::kSequency;
  throw Error(ErrorCode::kInvalidArgument, "ordering", "must be 'natural' or 'sequency'");
}

BoundaryMode ParseBoundary(const std::string& name) {
  if (name == "periodic") return BoundaryMode::kPeriodic;
  if (name == "boundary-corrected") return BoundaryMode::kBoundaryCorrected;
  throw Error(ErrorCode::kInvalidArgument, "boundary", "must be 'periodic' or 'boundary-corrected'");
}

std::string BoundaryName(BoundaryMode mode) {
  return mode == BoundaryMode::kPeriodic ? "periodic" : "boundary-corrected";
}

Shape MakeShape(Index n, int rank) {
  if (rank != 1 && rank != 2) throw Error(ErrorCode::kInvalidShape, "rank", "must be 1 or 2");
  return rank == 1 ? Shape::D1(n) : Shape::D2(n);
}

py::array_t<bool> MaskArray(const SamplingMap& map) {
  std::vector<py::ssize_t> dims = {map.shape.n};
  if (map.shape.rank == 2) dims.push_back(map.shape.n);
  py::array_t<bool> out(dims);
  std::copy(map.mask.begin(), map.mask.end(), out.mutable_data());
  return out;
}

py::dict TailDict(const TailCurves& t) {
  py::dict d;
  d["k"] = t.k;
  d["row"] = t.row;
  d["col"] = t.col;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compressed sensing with asymptotic sparsity, incoherence and multilevel sampling.";

  // Library errors become asymcs.Error (a ValueError) carrying the error
  // code and the offending field.
  static py::handle error_type = py::exception<Error>(m, "Error", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      exc.attr("code") = ToString(e.code());
      exc.attr("field") = e.field();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("set_thread_count", &SetThreadCount, py::arg("threads"));
  m.def("thread_count", &ThreadCount);

  // Transforms ---------------------------------------------------------------

  py::class_<WaveletSpec>(m, "WaveletSpec")
      .def(py::init([](int order, int levels, const std::string& boundary) {
             return WaveletSpec{order, levels, ParseBoundary(boundary)};
           }),
           py::arg("order") = 4, py::arg("levels") = 1, py::arg("boundary") = "periodic")
      .def_readwrite("order", &WaveletSpec::order)
      .def_readwrite("levels", &WaveletSpec::levels)
      .def_property(
          "boundary", [](const WaveletSpec& w) { return BoundaryName(w.boundary); },
          [](WaveletSpec& w, const std::string& b) { w.boundary = ParseBoundary(b); })
      .def("__repr__", &WaveletSpec::str);

  m.def(
      "dft",
      [](const CArray& x, bool inverse) {
        auto [v, s] = Flatten(x, "x");
        return Unflatten(Dft(v, s, ParseDirection(inverse)), s);
      },
      py::arg("x"), py::arg("inverse") = false, "Unitary DFT (natural frequency order) of a 1D or square 2D array.");
  m.def(
      "fwht",
      [](const CArray& x, const std::string& ordering, bool inverse) {
        auto [v, s] = Flatten(x, "x");
        return Unflatten(Fwht(v, s, ParseDirection(inverse), ParseOrdering(ordering)), s);
      },
      py::arg("x"), py::arg("ordering") = "sequency", py::arg("inverse") = false,
      "Orthonormal Walsh-Hadamard transform.");
  m.def(
      "dwt",
      [](const CArray& x, const WaveletSpec& spec, bool inverse) {
        auto [v, s] = Flatten(x, "x");
        return Unflatten(Dwt(v, s, spec, ParseDirection(inverse)), s);
      },
      py::arg("x"), py::arg("wavelet"), py::arg("inverse") = false,
      "Orthonormal wavelet analysis (or synthesis with inverse=True); coefficients coarse to fine.");
  m.def("daubechies_lowpass", &DaubechiesLowpass, py::arg("order"));

  py::class_<Operator>(m, "Operator")
      .def_property_readonly("kind", &Operator::kind)
      .def_property_readonly("rows", &Operator::rows)
      .def_property_readonly("cols", &Operator::cols)
      .def_property_readonly("is_isometry", &Operator::is_isometry)
      .def("apply", &Operator::apply, py::arg("x"))
      .def("apply_adjoint", &Operator::apply_adjoint, py::arg("y"))
      .def("adjoint", &Operator::adjoint)
      .def("matrix", [](const Operator& op) { return Materialize(op); }, "Dense matrix (column j = apply(e_j)).")
      .def("__matmul__", [](const Operator& a, const Operator& b) { return Compose({a, b}); })
      .def("__repr__", [](const Operator& op) {
        return "<Operator " + op.kind() + " " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) + ">";
      });

  m.def("dft_operator", [](Index n, int rank) { return DftOperator(MakeShape(n, rank)); }, py::arg("n"),
        py::arg("rank") = 1);
  m.def(
      "fwht_operator",
      [](Index n, int rank, const std::string& ordering) {
        return FwhtOperator(MakeShape(n, rank), ParseOrdering(ordering));
      },
      py::arg("n"), py::arg("rank") = 1, py::arg("ordering") = "sequency");
  m.def("dwt_operator", [](Index n, int rank, const WaveletSpec& w) { return DwtOperator(MakeShape(n, rank), w); },
        py::arg("n"), py::arg("rank"), py::arg("wavelet"), "Forward rule is analysis, adjoint is synthesis.");
  m.def("identity_operator", [](Index n, int rank) { return Identity(MakeShape(n, rank)); }, py::arg("n"),
        py::arg("rank") = 1);
  m.def("center_frequencies", [](Index n, int rank) { return CenterFrequencies(MakeShape(n, rank)); },
        py::arg("n"), py::arg("rank") = 1);
  m.def("frequency_magnitude_order", &FrequencyMagnitudeOrder, py::arg("n"));
  m.def("compose", &Compose, py::arg("operators"), "Compose([A, B]) = A B.");
  m.def("tensor_2d", &Tensor2d, py::arg("op1d"));
  m.def("random_orthogonal", &RandomOrthogonal, py::arg("n"), py::arg("seed"));
  m.def("scrambled_hadamard", [](Index n, int rank, std::uint64_t seed) {
    return ScrambledHadamard(MakeShape(n, rank), seed);
  }, py::arg("n"), py::arg("rank"), py::arg("seed"));
  m.def(
      "sensing_operator",
      [](const std::string& kind, Index n, std::uint64_t seed) { return SensingOperator(ParseSensing(kind), n, seed); },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0,
      "2D sensing operator: 'dft' (centered), 'hadamard' (sequency) or 'flat'.");

  // Levels, coherence, sparsity ----------------------------------------------

  py::class_<LevelStructure>(m, "LevelStructure")
      .def(py::init<std::vector<Index>>(), py::arg("boundaries"))
      .def_static("single", &LevelStructure::Single, py::arg("total"))
      .def_static("dyadic", &LevelStructure::Dyadic, py::arg("total"), py::arg("r"))
      .def_property_readonly("boundaries", &LevelStructure::boundaries)
      .def_property_readonly("count", &LevelStructure::count)
      .def("width", &LevelStructure::width, py::arg("k"))
      .def("band_of", &LevelStructure::band_of, py::arg("i"));
  m.def("wavelet_levels", [](Index n, int rank, int levels) { return WaveletLevels(MakeShape(n, rank), levels); },
        py::arg("n"), py::arg("rank"), py::arg("levels"));

  m.def("global_coherence", &GlobalCoherence, py::arg("u"));
  m.def("local_coherence", &LocalCoherence, py::arg("u"), py::arg("n_levels"), py::arg("m_levels"));
  m.def("tail_coherence", [](const Operator& u, const std::vector<Index>& k) { return TailDict(TailCoherence(u, k)); },
        py::arg("u"), py::arg("k_grid"));
  m.def(
      "relative_sparsity",
      [](const Operator& u, const LevelStructure& nl, const LevelStructure& ml, const std::vector<Index>& s,
         const std::string& mode, int restarts, std::uint64_t seed) {
        if (mode != "exact" && mode != "greedy") {
          throw Error(ErrorCode::kInvalidArgument, "mode", "must be 'exact' or 'greedy'");
        }
        const RelativeSparsityResult r =
            RelativeSparsity(u, nl, ml, s, mode == "exact" ? SearchMode::kExact : SearchMode::kGreedy, restarts, seed);
        py::dict d;
        d["values"] = r.values;
        d["lower_bound"] = r.lower_bound;
        d["phase_net_slack"] = r.phase_net_slack;
        return d;
      },
      py::arg("u"), py::arg("n_levels"), py::arg("m_levels"), py::arg("s"), py::arg("mode") = "greedy",
      py::arg("restarts") = 1000, py::arg("seed") = 0);

  m.def(
      "local_sparsity",
      [](const CArray& c, const LevelStructure& levels, double eps) {
        return LocalSparsity(Flatten(c, "coeffs").first, levels, eps);
      },
      py::arg("coeffs"), py::arg("levels"), py::arg("epsilon"));
  m.def(
      "sparsity_curve",
      [](const RMat& image, const WaveletSpec& w, const std::vector<double>& eps) {
        const SparsityProfile p = SparsityCurve(ImageToVec(image), Shape::D2(image.rows()), w, eps);
        py::dict d;
        d["s"] = p.s;
        d["relative"] = p.relative;
        d["boundaries"] = p.levels.boundaries();
        return d;
      },
      py::arg("image"), py::arg("wavelet"), py::arg("epsilons"),
      "Per-scale sparsity s_k(eps) of a square image; rows are epsilons, columns scales.");

  // Sampling -----------------------------------------------------------------

  py::class_<AllRoundSpec>(m, "AllRoundSpec")
      .def(py::init([](int n_regions, double m_radius, double a, double b) {
             return AllRoundSpec{n_regions, m_radius, a, b};
           }),
           py::arg("n_regions") = 50, py::arg("m_radius") = 0.08, py::arg("a") = 2.0, py::arg("b") = 1.0)
      .def_readwrite("n_regions", &AllRoundSpec::n_regions)
      .def_readwrite("m_radius", &AllRoundSpec::m_radius)
      .def_readwrite("a", &AllRoundSpec::a)
      .def_readwrite("b", &AllRoundSpec::b)
      .def("predicted_fraction", [](const AllRoundSpec& s, bool one_d) {
        return one_d ? AllRoundPredictedFraction1D(s) : AllRoundPredictedFraction(s);
      }, py::arg("one_dimensional") = false);

  py::class_<SamplingMap>(m, "SamplingMap")
      .def_property_readonly("mask", &MaskArray)
      .def_property_readonly("indices", &SamplingMap::indices)
      .def_readonly("m", &SamplingMap::m)
      .def_readonly("seed", &SamplingMap::seed)
      .def_readonly("scheme", &SamplingMap::scheme)
      .def_readonly("region", &SamplingMap::region)
      .def_readonly("predicted_fraction", &SamplingMap::predicted_fraction)
      .def_property_readonly("fraction", &SamplingMap::fraction)
      .def("sampled_per_region", &SamplingMap::sampled_per_region)
      .def("save", [](const SamplingMap& map, const std::string& path) { SaveMap(path, map); }, py::arg("path"))
      .def_static("load", &LoadMap, py::arg("path"));

  m.def("calibrate_fraction", &CalibrateFraction, py::arg("spec"), py::arg("target"),
        py::arg("one_dimensional") = false);
  m.def("all_round_map", [](Index n, int rank, const AllRoundSpec& s, std::uint64_t seed) {
    return AllRoundMap(MakeShape(n, rank), s, seed);
  }, py::arg("n"), py::arg("rank"), py::arg("spec"), py::arg("seed"));
  m.def("uniform_map", [](Index n, int rank, Index count, std::uint64_t seed) {
    return UniformMap(MakeShape(n, rank), count, seed);
  }, py::arg("n"), py::arg("rank"), py::arg("m"), py::arg("seed"));
  m.def("full_map", [](Index n, int rank) { return FullMap(MakeShape(n, rank)); }, py::arg("n"), py::arg("rank"));
  m.def("multilevel_map", [](Index n, int rank, const LevelStructure& l, const std::vector<Index>& counts,
                             std::uint64_t seed) { return MultilevelMap(MakeShape(n, rank), l, counts, seed); },
        py::arg("n"), py::arg("rank"), py::arg("levels"), py::arg("counts"), py::arg("seed"));
  m.def(
      "build_map",
      [](const std::string& sensing, Index n, const std::string& scheme, double fraction, std::uint64_t seed,
         int n_regions, double m_radius, double a, double first_level_share) {
        MapSpec spec{ParseMapScheme(scheme), fraction, {n_regions, m_radius, a, 1.0}, first_level_share};
        return BuildMap(ParseSensing(sensing), spec, n, seed);
      },
      py::arg("sensing"), py::arg("n"), py::arg("scheme") = "allround", py::arg("fraction") = 0.125,
      py::arg("seed") = 1, py::arg("n_regions") = 50, py::arg("m_radius") = 0.08, py::arg("a") = 2.0,
      py::arg("first_level_share") = 0.5,
      "Sampling map on the output grid of a 2D sensing operator ('dft', 'hadamard' or 'flat').");

  // Solvers ------------------------------------------------------------------

  py::class_<SolverControls>(m, "SolverControls")
      .def(py::init([](int max_iterations, double tolerance, bool real_coefficients, int log_every) {
             SolverControls c;
             c.max_iterations = max_iterations;
             c.tolerance = tolerance;
             c.real_coefficients = real_coefficients;
             c.log_every = log_every;
             return c;
           }),
           py::arg("max_iterations") = 2000, py::arg("tolerance") = 1e-6, py::arg("real_coefficients") = false,
           py::arg("log_every") = 0)
      .def_readwrite("max_iterations", &SolverControls::max_iterations)
      .def_readwrite("tolerance", &SolverControls::tolerance)
      .def_readwrite("power_iterations", &SolverControls::power_iterations)
      .def_readwrite("step", &SolverControls::step)
      .def_readwrite("real_coefficients", &SolverControls::real_coefficients)
      .def_readwrite("log_every", &SolverControls::log_every);

  py::class_<RecoveryResult>(m, "RecoveryResult")
      .def_readonly("estimate", &RecoveryResult::estimate)
      .def_readonly("reconstruction", &RecoveryResult::reconstruction)
      .def_readonly("residual", &RecoveryResult::residual)
      .def_readonly("objective", &RecoveryResult::objective)
      .def_readonly("iterations", &RecoveryResult::iterations)
      .def_readonly("converged", &RecoveryResult::converged)
      .def_readonly("relative_error", &RecoveryResult::relative_error)
      .def_readonly("imaginary_energy", &RecoveryResult::imaginary_energy)
      .def_property_readonly("log", [](const RecoveryResult& r) {
        std::vector<std::tuple<int, double, double, double>> rows;
        for (const auto& e : r.log) rows.emplace_back(e.iteration, e.objective, e.residual, e.best_objective);
        return rows;
      });

  m.def(
      "solve_l1",
      [](const Operator& op, const std::vector<Index>& omega, const Vec& y, double eta,
         std::optional<RVec> weights, const SolverControls& c) {
        RecoveryProblem p{.op = op, .omega = omega, .y = y, .eta = eta};
        p.controls = c;
        if (weights) {
          p.regularizer = Regularizer::kWeightedL1;
          p.weights = *weights;
          return SolveWeightedL1(p);
        }
        return SolveL1(p);
      },
      py::arg("op"), py::arg("omega"), py::arg("y"), py::arg("eta") = 0.0, py::arg("weights") = py::none(),
      py::arg("controls") = SolverControls{}, "min sum w|z| s.t. ||y - P_omega op z|| <= eta.");
  m.def(
      "solve_l1_dense",
      [](const CMat& a, const Vec& y, double eta, const SolverControls& c) {
        const CMat mat = a;
        const CMat adj = a.adjoint();
        const Index rows = a.rows(), cols = a.cols();
        const Shape in = Shape::D1(cols), out = Shape::D1(rows);
        Operator op("dense", in, out, [mat](const Vec& x) { return Vec(mat * x); },
                    [adj](const Vec& v) { return Vec(adj * v); }, false);
        std::vector<Index> omega(static_cast<size_t>(rows));
        for (Index i = 0; i < rows; ++i) omega[static_cast<size_t>(i)] = i;
        RecoveryProblem p{.op = op, .omega = omega, .y = y, .eta = eta};
        p.controls = c;
        return SolveL1(p);
      },
      py::arg("a"), py::arg("y"), py::arg("eta") = 0.0, py::arg("controls") = SolverControls{},
      "min ||z||_1 s.t. ||y - A z|| <= eta for a dense matrix A.");
  m.def(
      "solve_tv",
      [](Index n, const std::vector<Index>& omega, const Vec& y, double eta, bool real_image, const SolverControls& c) {
        TvProblem p{.n = n, .omega = omega, .y = y, .eta = eta, .real_image = real_image};
        p.controls = c;
        return SolveTv(p);
      },
      py::arg("n"), py::arg("omega"), py::arg("y"), py::arg("eta") = 0.0, py::arg("real_image") = true,
      py::arg("controls") = SolverControls{}, "min TV(x) from centered-DFT samples of an n x n image.");
  m.def("measure", &Measure, py::arg("op"), py::arg("omega"), py::arg("x"));
  m.def("total_variation", &TotalVariation, py::arg("image"));
  m.def("gradient_magnitudes", [](const RMat& image) {
    const RVec g = GradientMagnitudes(image);
    return RMat(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        g.data(), image.rows(), image.cols()));
  }, py::arg("image"));

  // Images and pipelines -----------------------------------------------------

  m.def("phantom", &PhantomById, py::arg("id"), py::arg("n"), "'geometric', 'blob' or 'tv', values in [0, 1].");
  m.def("load_image", &LoadImage, py::arg("path"));
  m.def("save_image", &SaveImage, py::arg("path"), py::arg("image"));
  m.def("downsample", &Downsample, py::arg("image"), py::arg("factor"));
  m.def("default_wavelet_levels", &DefaultWaveletLevels, py::arg("n"));

  m.def(
      "recover_image",
      [](const RMat& image, const std::string& sensing, const SamplingMap& map, const WaveletSpec& w, double eta,
         const SolverControls& c, std::uint64_t operator_seed) {
        ImageRecoverySetup s{.image = image, .sensing = ParseSensing(sensing), .operator_seed = operator_seed,
                             .wavelet = w, .map = map, .eta = eta, .controls = c};
        const ImageRecovery r = RecoverImage(s);
        py::dict d;
        d["image"] = r.image;
        d["error"] = r.error;
        d["result"] = r.result;
        return d;
      },
      py::arg("image"), py::arg("sensing"), py::arg("map"), py::arg("wavelet") = WaveletSpec{4, 0},
      py::arg("eta") = 0.0, py::arg("controls") = SolverControls{500}, py::arg("operator_seed") = 0,
      "l1 recovery of an image in wavelets from simulated samples; wavelet levels 0 selects the default depth.");

  m.def(
      "flip_test",
      [](const RMat& image, const std::string& sensing, const SamplingMap& map, const WaveletSpec& w, double eta,
         const SolverControls& c, std::uint64_t operator_seed) {
        const Index n = image.rows();
        WaveletSpec wavelet = w;
        if (wavelet.levels == 0) wavelet.levels = DefaultWaveletLevels(n);
        FlipTestSetup s{.signal = ImageToVec(image), .sensing = SensingOperator(ParseSensing(sensing), n, operator_seed),
                        .analysis = DwtOperator(Shape::D2(n), wavelet), .map = map, .eta = eta};
        s.controls = c;
        s.controls.real_coefficients = true;
        const FlipReport r = RunFlipTest(s);
        py::dict d;
        d["error_direct"] = r.error_direct;
        d["error_flipped"] = r.error_flipped;
        d["ratio"] = r.ratio;
        d["direct"] = VecToImage(r.reconstruction_direct, n);
        d["flipped"] = VecToImage(r.reconstruction_flipped, n);
        d["converged"] = r.direct.converged && r.flipped.converged;
        return d;
      },
      py::arg("image"), py::arg("sensing"), py::arg("map"), py::arg("wavelet") = WaveletSpec{4, 0},
      py::arg("eta") = 0.0, py::arg("controls") = SolverControls{500}, py::arg("operator_seed") = 0,
      "Recovers the image and the image whose wavelet coefficients were reversed, from the same map.");

  m.def(
      "permuted_gradient_image",
      [](const RMat& image, std::uint64_t seed) {
        const PermutedGradientImage p = MakePermutedGradientImage(image, seed);
        py::dict d;
        d["image"] = p.image;
        d["holds"] = p.certificate.holds;
        d["tv_in"] = p.certificate.tv_in;
        d["tv_out"] = p.certificate.tv_out;
        d["max_magnitude_gap"] = p.certificate.max_magnitude_gap;
        return d;
      },
      py::arg("image"), py::arg("seed"));
  m.def(
      "tv_flip_test",
      [](const RMat& image, const SamplingMap& map, std::uint64_t twin_seed, double eta, const SolverControls& c) {
        TvFlipSetup s{.image = image, .map = map, .eta = eta, .twin_seed = twin_seed};
        s.controls = c;
        const TvFlipReport r = RunTvFlipTest(s);
        const Index n = image.rows();
        py::dict d;
        d["error_original"] = r.report.error_direct;
        d["error_twin"] = r.report.error_flipped;
        d["twin"] = r.twin.image;
        d["original_recovery"] = VecToImage(r.report.reconstruction_direct, n);
        d["twin_recovery"] = VecToImage(r.report.reconstruction_flipped, n);
        d["certificate_holds"] = r.twin.certificate.holds;
        return d;
      },
      py::arg("image"), py::arg("map"), py::arg("twin_seed") = 1, py::arg("eta") = 0.0,
      py::arg("controls") = SolverControls{2000});

  // Fluorescence microscopy --------------------------------------------------

  py::class_<MeasurementSet>(m, "MeasurementSet")
      .def_readonly("n", &MeasurementSet::n)
      .def_readonly("rows", &MeasurementSet::rows)
      .def_readonly("scale", &MeasurementSet::scale)
      .def_readonly("gamma", &MeasurementSet::gamma)
      .def_readwrite("counts", &MeasurementSet::counts)
      .def("corrected", &CorrectMeasurements)
      .def("corrected_noise_radius", &CorrectedNoiseRadius);

  m.def(
      "fm_forward",
      [](const RMat& x, double psf_cutoff, const SamplingMap& map, double budget, std::optional<std::uint64_t> seed) {
        MeasurementSet s = ForwardModel(x, PsfSpec{psf_cutoff}, map, budget);
        if (seed) s.counts = PoissonSample(s.gamma, *seed);
        return s;
      },
      py::arg("x"), py::arg("psf_cutoff"), py::arg("map"), py::arg("budget") = 1e6, py::arg("noise_seed") = py::none(),
      "Photon counts of the 0/1 Hadamard patterns through the lens; Poisson noise when noise_seed is given.");
  m.def("poisson_sample", &PoissonSample, py::arg("gamma"), py::arg("seed"));
  m.def(
      "fm_recover",
      [](const MeasurementSet& s, double psf_cutoff, const WaveletSpec& w, const std::string& mode, double eta,
         const SolverControls& c, std::optional<RMat> truth) {
        if (mode != "full" && mode != "hadamard") {
          throw Error(ErrorCode::kInvalidArgument, "mode", "must be 'full' or 'hadamard'");
        }
        const CfmRecovery r = RecoverCfm(s, PsfSpec{psf_cutoff}, w,
                                         mode == "full" ? CfmMode::kFullChain : CfmMode::kHadamardOnly, eta, c,
                                         truth ? &*truth : nullptr);
        py::dict d;
        d["image"] = r.image;
        d["error"] = r.error;
        d["result"] = r.result;
        return d;
      },
      py::arg("measurements"), py::arg("psf_cutoff"), py::arg("wavelet"), py::arg("mode") = "full",
      py::arg("eta") = -1.0, py::arg("controls") = SolverControls{2000}, py::arg("truth") = py::none(),
      "Recovery from the corrected counts; a negative eta is estimated from the counts.");

  // Infinite-dimensional sampling --------------------------------------------

  py::class_<ContinuousTarget>(m, "ContinuousTarget")
      .def_readonly("id", &ContinuousTarget::id)
      .def("__call__", [](const ContinuousTarget& t, double x) { return t.eval(x); }, py::arg("t"));
  m.def("target", &TargetById, py::arg("id"), "'zero', 'constant', 'expcos2' or 'ramp'.");
  m.def("fourier_samples", &ContinuousFourierSamples, py::arg("target"), py::arg("frequencies"),
        py::arg("prefer_closed_form") = true);
  m.def("half_integer_frequencies", &HalfIntegerFrequencies, py::arg("n_half"), py::arg("centered"));
  m.def("unit_grid", &UnitGrid, py::arg("n_half"));

  py::class_<SliceSpec>(m, "SliceSpec")
      .def(py::init([](const WaveletSpec& w, Index columns, int fine_log2) { return SliceSpec{w, columns, fine_log2}; }),
           py::arg("wavelet") = WaveletSpec{6, 10, BoundaryMode::kBoundaryCorrected}, py::arg("columns") = 512,
           py::arg("fine_log2") = 14)
      .def_readwrite("wavelet", &SliceSpec::wavelet)
      .def_readwrite("columns", &SliceSpec::columns)
      .def_readwrite("fine_log2", &SliceSpec::fine_log2);
  py::class_<SynthesisMatrixSlice>(m, "SynthesisMatrixSlice")
      .def_readonly("frequencies", &SynthesisMatrixSlice::frequencies)
      .def_readonly("entries", &SynthesisMatrixSlice::entries);
  m.def("synthesis_slice", &BuildSynthesisSlice, py::arg("spec"), py::arg("frequencies"), py::arg("cache_dir") = "",
        "Fourier samples of the first K boundary wavelets on [0, 1] at the given frequencies.");
  m.def("synthesize_on_grid", &SynthesizeOnGrid, py::arg("spec"), py::arg("z"), py::arg("t"));
  m.def(
      "solve_infdim",
      [](const SynthesisMatrixSlice& s, const Vec& y, double eta, const SolverControls& c, const RVec& grid,
         const ContinuousTarget* target) {
        const InfdimResult r = SolveInfdim(s, y, eta, c, grid, target);
        py::dict d;
        d["values"] = r.values;
        d["error"] = r.error;
        d["result"] = r.result;
        return d;
      },
      py::arg("slice"), py::arg("samples"), py::arg("eta"), py::arg("controls"), py::arg("grid"),
      py::arg("target") = nullptr);
}
