#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// A function supported on [0, support] with an optional closed-form Fourier
// transform g(w) = ∫ f(t) exp(-2 pi i w t) dt.
struct ContinuousTarget {
  std::string id;
  double support = 1.0;
  std::function<Complex(double)> eval;
  std::function<Complex(double)> fourier;  // empty: use quadrature
};

ContinuousTarget ZeroTarget();
ContinuousTarget ConstantTarget();  // f = 1 on [0, 1]
ContinuousTarget ExpCos2Target();   // f = exp(-t) cos^2(t) on [0, 1]
ContinuousTarget RampTarget();      // f = t on [0, 1]
// f(t) = sum_k c_k exp(i pi j_k t) on [0, 2): 2-periodic and band-limited
// on the half-integer frequency grid.
ContinuousTarget TrigTarget(const std::vector<std::pair<int, Complex>>& terms);
ContinuousTarget TargetById(const std::string& id);

// Adaptive Gauss-Kronrod quadrature of the Fourier integral to `tolerance`
// absolute; throws kConstruction when the error estimate stays above it.
Complex QuadratureFourierSample(const ContinuousTarget& target, double w,
                                double tolerance = 1e-10);
// Closed form where available, quadrature otherwise.
Vec ContinuousFourierSamples(const ContinuousTarget& target, const std::vector<double>& w,
                             bool prefer_closed_form = true);

// The 2N-point half-integer grid j / 2, j = 1 - N .. N, indexed in centered
// order: index c in [0, 2N) holds j = c - N, except c = 0 which holds j = N
// (the two coincide modulo 2N).
int HalfIntegerIndex(Index c, Index n_half);
std::vector<double> HalfIntegerFrequencies(Index n_half, const std::vector<Index>& centered);

// f_N(t) = 1/2 sum_j g(j/2) exp(i pi j t) at t_k = k / N, k = 0 .. 2N-1
// (the equispaced grid of [0, 2), equivalently of [0, 1) in the variable
// t / 2). `samples` is centered as in HalfIntegerIndex; missing samples are
// zeros.
Vec TruncatedFourierSeries(const Vec& samples);

struct SliceSpec {
  WaveletSpec wavelet{6, 10, BoundaryMode::kBoundaryCorrected};
  Index columns = 512;  // K
  int fine_log2 = 14;   // resolution of the cascade
};

// Inner products <phi_j, e^{2 pi i w t}> = ∫ phi_j(t) exp(-2 pi i w t) dt for
// the first K wavelets on [0, 1]. phi_j is the piecewise-linear interpolant
// of its cascade samples sqrt(M) (W^{-1} e_j)_k at the nodes k / (M - 1),
// M = 2^fine_log2, where W is the depth-r discrete transform on length M.
// The integrals of that interpolant are evaluated in closed form.
struct SynthesisMatrixSlice {
  SliceSpec spec;
  std::vector<double> frequencies;
  CMat entries;  // frequencies.size() x K
};

void ValidateSliceSpec(const SliceSpec& spec);
// Node values of the first K basis functions, one column each (M x K).
RMat BasisNodeValues(const SliceSpec& spec);
CMat SliceEntries(const RMat& nodes, const std::vector<double>& frequencies);
// Optional cache: `cache_dir` non-empty stores and reuses the entries as a
// binary array plus JSON metadata.
SynthesisMatrixSlice BuildSynthesisSlice(const SliceSpec& spec,
                                         const std::vector<double>& frequencies,
                                         const std::string& cache_dir = "");
// Composite trapezoidal rule on the same interpolant with `refine` points
// per node interval; converges to the closed form as refine grows.
Complex TrapezoidEntry(const RVec& node_values, double w, int refine);
// Evaluates sum_j z_j phi_j at the points t (in [0, 1]).
RVec SynthesizeOnGrid(const SliceSpec& spec, const Vec& z, const RVec& t);

struct InfdimResult {
  RecoveryResult result;
  RVec values;  // on the evaluation grid
  std::optional<double> error;  // percent against the target on that grid
};

// min ‖z‖₁ s.t. ‖y - P_Omega U P_K z‖ <= eta with the explicit slice.
InfdimResult SolveInfdim(const SynthesisMatrixSlice& slice, const Vec& samples, double eta,
                         const SolverControls& controls, const RVec& eval_grid,
                         const ContinuousTarget* target = nullptr);

// Baselines on the 2N grid of [0, 2) from samples at the centered map
// indices: the zero-filled truncated Fourier series and l1 recovery in
// periodic wavelets with the discrete model DFT W^{-1} (x_k = f(t_k) sqrt(1/N)).
struct CrimeBaselines {
  RVec linear;    // f_N on t_k = k / N, k < N
  RVec discrete;  // discrete-CS values on the same points
  double linear_error = 0;
  double discrete_error = 0;
  RecoveryResult discrete_result;
};

CrimeBaselines RunCrimeBaselines(const ContinuousTarget& target, Index n_half,
                                 const std::vector<Index>& centered, const Vec& samples,
                                 const WaveletSpec& periodic, const SolverControls& controls,
                                 double eta = 0.0);

// Samples of the discrete model itself (the inverse crime): DFT of
// x_k = f(t_k) sqrt(1/N), scaled to continuous-transform units.
Vec DiscreteModelSamples(const ContinuousTarget& target, Index n_half,
                         const std::vector<Index>& centered);

// The inverse crime: data simulated with the discrete recovery model itself
// from a signal that satisfies its sparsity assumption (the best s-term
// periodic-wavelet approximation of the discretized target). The error is
// measured against that discrete truth, so it reflects only the solver.
struct InverseCrimeControl {
  double error = 0;  // percent
  RecoveryResult result;
};

InverseCrimeControl RunInverseCrimeControl(const ContinuousTarget& target, Index n_half,
                                           const std::vector<Index>& centered,
                                           const WaveletSpec& periodic, Index terms,
                                           const SolverControls& controls);

// Relative l2 error (percent) of values against f on t_k = k / N, k < N.
double GridErrorPercent(const RVec& values, const ContinuousTarget& target, Index n_half);
RVec UnitGrid(Index n_half);  // t_k = k / N, k < N

}  // namespace asymcs
