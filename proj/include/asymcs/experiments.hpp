#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// Shared image-recovery pipelines used by the command-line runner, the
// acceptance suite and the Python bindings.

// Sensing operators on n x n images. kDft is the unitary DFT in centered
// layout, kHadamard the sequency-ordered Walsh-Hadamard transform (DC at
// index 0), kFlat a seeded scrambled Hadamard with flat coherence.
enum class SensingKind { kDft, kHadamard, kFlat };

SensingKind ParseSensing(const std::string& name);  // "dft", "hadamard", "flat"
std::string ToString(SensingKind kind);
Operator SensingOperator(SensingKind kind, Index n, std::uint64_t seed = 0);

enum class MapScheme { kAllRound, kUniform, kHalfHalf, kFull };

MapScheme ParseMapScheme(const std::string& name);  // "allround", "uniform", "halfhalf", "full"
std::string ToString(MapScheme scheme);

struct MapSpec {
  MapScheme scheme = MapScheme::kAllRound;
  double fraction = 0.125;
  // n_regions, m_radius and a; b is calibrated to the fraction.
  AllRoundSpec allround;
  // Half-half: share of the budget spent on the fully sampled leading block.
  double first_level_share = 0.5;
};

void ValidateMapSpec(const MapSpec& spec);

// Indices of the centered n x n grid ordered by distance from DC (ties by
// index), the half-half analog of SquareShellOrder for Fourier sampling.
std::vector<Index> CenteredRadialOrder(Index n);

// Map on the output grid of the sensing operator. Centered-grid schemes are
// carried to the Hadamard grid with HadamardOrderingAdapter; Hadamard maps
// always contain the all-ones row.
SamplingMap BuildMap(SensingKind kind, const MapSpec& spec, Index n, std::uint64_t seed);

// The wavelet depth used by default for an n x n image: log2(n) - 3, at least 1.
int DefaultWaveletLevels(Index n);

struct ImageRecoverySetup {
  RMat image;
  SensingKind sensing = SensingKind::kDft;
  std::uint64_t operator_seed = 0;  // kFlat only
  WaveletSpec wavelet{4, 0, BoundaryMode::kPeriodic};  // levels 0: default depth
  SamplingMap map;
  double eta = 0.0;
  SolverControls controls;
};

struct ImageRecovery {
  RecoveryResult result;
  RMat image;  // real part of the reconstruction
  double error = 0;  // percent against the input image
};

// min ‖z‖₁ s.t. ‖y - P_Omega U Phi^* z‖ <= eta with real coefficients, the
// measurements simulated from the image.
ImageRecovery RecoverImage(const ImageRecoverySetup& setup);

// Box-filter downsampling by an integer power-of-two factor.
RMat Downsample(const RMat& image, Index factor);

// Resolution dependency at a fixed sampling fraction: the same scene at
// each size (a phantom rendered at that size, or the image box-filtered down)
// recovered from the same map recipe.
struct SweepRow {
  Index n = 0;
  Index m = 0;
  double fraction = 0;
  double error = 0;
  int iterations = 0;
  bool converged = false;
};

struct ResolutionSweepSetup {
  std::string phantom;  // phantom id; used when image is empty
  RMat image;           // full-resolution input, size >= max(sizes)
  std::vector<Index> sizes{64, 128, 256};
  SensingKind sensing = SensingKind::kDft;
  MapSpec map{MapScheme::kAllRound, 0.0625};
  int wavelet_order = 4;
  std::uint64_t seed = 1;
  SolverControls controls;
};

std::vector<SweepRow> ResolutionSweep(const ResolutionSweepSetup& setup);

// Fixed number of samples: low_n^2 Fourier samples spent either on the full
// low_n x low_n block (linear recovery, zero-filled at high_n) or spread by
// the map recipe over the high_n grid (l1 recovery). Both errors are against
// the high_n image.
struct FixedCountSetup {
  std::string phantom;
  RMat image;  // high_n x high_n when given
  Index low_n = 64;
  Index high_n = 256;
  MapSpec map{MapScheme::kAllRound, 0.0};  // fraction is derived from the count
  int wavelet_order = 4;
  std::uint64_t seed = 1;
  SolverControls controls;
};

struct FixedCountResult {
  Index samples = 0;
  RMat linear;
  double linear_error = 0;
  ImageRecovery cs;
};

FixedCountResult FixedCountSweep(const FixedCountSetup& setup);

// Zero-filled inverse DFT from the centered low_n x low_n block of the
// image's spectrum (real part).
RMat LowpassLinear(const RMat& image, Index low_n);

}  // namespace asymcs
