#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// Lens point spread function as an ideal low-pass filter: frequencies of the
// centered n x n grid within normalized radius `cutoff` (the grid spans
// [-1, 1)^2, so cutoff >= sqrt(2) passes everything) are kept.
struct PsfSpec {
  double cutoff = 0.2;
};

void ValidatePsf(const PsfSpec& psf);
// Mask over centered frequency indices.
std::vector<bool> PsfMask(const PsfSpec& psf, Index n);
// C = F^* P_psf F on n x n images. The disc is symmetric under w -> -w, so C
// is a real symmetric projection.
Operator PsfOperator(const PsfSpec& psf, Index n);

// Illumination patterns are the rows of the 0/1 matrix Psi_m = (H + 1)/2
// where H is the +-1 sequency Hadamard matrix and 1 the all-ones matrix. The
// lens blurs each pattern before it reaches the specimen, so measurement i is
// <C p_i, x> = (Psi_m C x)_i.
//
// In orthonormal units (H = n Psi) this operator is (Psi + 1/n)/2 applied
// after C.
Operator OnesOperator(Index n);  // x -> (sum x / n) in every entry
Operator PatternOperator(Index n, const PsfSpec& psf);

struct MeasurementSet {
  Index n = 0;
  SamplingMap omega;  // sequency Hadamard indices
  std::vector<Index> rows;  // omega.indices()
  Index ones_row_index = -1;  // position of row 0 within rows
  // Photons per unit intensity: x is multiplied by this before measuring.
  double scale = 1;
  RVec gamma;  // noiseless counts
  std::vector<std::int64_t> counts;
};

// gamma = floor(|P_Omega Psi_m C (scale x)|) with scale = budget / sum(x), so
// the all-ones pattern collects `budget` photons in expectation. Counts are
// initialized to gamma (noiseless).
MeasurementSet ForwardModel(const RMat& x, const PsfSpec& psf, const SamplingMap& omega,
                            double budget = 1e6);

std::vector<std::int64_t> PoissonSample(const RVec& gamma, std::uint64_t seed);

// y'_i = 2 y_i - y_1 with y_1 the all-ones measurement.
RVec CorrectMeasurements(const MeasurementSet& m);

// Radius of the noise ball for the corrected data in orthonormal units, from
// the Poisson variances estimated by the counts themselves.
double CorrectedNoiseRadius(const MeasurementSet& m);
double RawNoiseRadius(const MeasurementSet& m);

enum class CfmMode { kFullChain, kHadamardOnly };

struct CfmRecovery {
  RecoveryResult result;
  RMat image;  // clamped to [0, 1]
  std::optional<double> error;  // percent, against truth when given
};

// min ‖z‖₁ s.t. ‖y'/(n scale) - P_Omega U z‖ <= eta with U = Psi C Phi^*
// (full chain) or U = Psi Phi^* (Hadamard only). Negative eta selects
// CorrectedNoiseRadius.
CfmRecovery RecoverCfm(const MeasurementSet& m, const PsfSpec& psf, const WaveletSpec& wavelet,
                       CfmMode mode, double eta = -1, const SolverControls& controls = {},
                       const RMat* truth = nullptr);

// The earlier approach: raw counts, the non-isometric Psi_m as the model
// (without the PSF) and a half-half map of the leading square block of
// sequency indices. The synthesis form with an orthonormal Phi is the
// analysis objective min ‖Phi x‖₁.
struct BaselineSetup {
  RMat x;
  PsfSpec psf;
  double fraction = 0.0625;
  double budget = 1e6;
  WaveletSpec wavelet;
  std::uint64_t seed = 0;
  SolverControls controls;
};

struct BaselineRecovery {
  MeasurementSet measurements;
  CfmRecovery recovery;
};

BaselineRecovery InitialApproachBaseline(const BaselineSetup& setup);

// Ratios ‖Psi_m x‖ / ‖x‖ (orthonormal units) over Gaussian probes.
RVec PatternNormRatios(Index n, int probes, std::uint64_t seed);

// Little-endian binary dump: int64 count, then the values as float64.
void WriteBinaryArray(const std::string& path, const RVec& values);
RVec ReadBinaryArray(const std::string& path);

}  // namespace asymcs
