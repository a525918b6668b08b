#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "asymcs/core.hpp"
#include "asymcs/sampling.hpp"
#include "asymcs/solvers.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

struct FlipReport {
  double error_direct = 0;   // percent
  double error_flipped = 0;  // percent
  // error_flipped / error_direct, absent when error_direct is 0.
  std::optional<double> ratio;
  std::string config;  // JSON snapshot of operator, map, image id and seed
  Vec reconstruction_direct;
  Vec reconstruction_flipped;
  RecoveryResult direct;
  RecoveryResult flipped;
};

// Index reversal: out[i] = x[N - 1 - i].
Vec Flip(const Vec& x);

// Recovers alpha from P_Omega U c with c = analysis(signal) and z from
// P_Omega U flip(c), where U = sensing * analysis^*. The flipped
// reconstruction is synthesis(flip(z)). Both errors are measured against
// the signal. 2D coefficient vectors are flipped in their linearized order.
struct FlipTestSetup {
  Vec signal;
  Operator sensing;    // signal -> full measurement grid
  Operator analysis;   // signal -> coefficients (isometric sparsifying map)
  SamplingMap map;
  double eta = 0.0;
  SolverControls controls;
  std::string image_id;
};

FlipReport RunFlipTest(const FlipTestSetup& setup);

struct GradientCertificate {
  double max_magnitude_gap = 0;  // max |sorted_in - sorted_out|
  double tv_in = 0;
  double tv_out = 0;
  double tv_relative_gap = 0;
  Index nonzero_in = 0;
  Index nonzero_out = 0;
  bool holds = false;
};

struct PermutedGradientImage {
  RMat image;
  GradientCertificate certificate;
  std::uint64_t seed = 0;  // seed of the successful attempt
  int attempts = 0;
};

// Twin image whose gradient magnitudes are a seeded permutation of the
// input's. The zero magnitudes fill a constant region and the nonzero ones
// are placed, in shuffled order, on the first pixels of the raster order;
// each pixel value is solved in reverse raster order from its already fixed
// lower and right neighbours so that its gradient magnitude equals the
// assigned one, choosing the root that stays inside [0, 1]. A failed attempt
// reshuffles; kConstruction is thrown after `max_attempts`. Seed 0 is the
// identity permutation and returns the input unchanged.
PermutedGradientImage MakePermutedGradientImage(const RMat& image, std::uint64_t seed,
                                                int max_attempts = 100);

GradientCertificate CertifyGradientPermutation(const RMat& original, const RMat& twin);

// TV recovery of the image and of its permuted-gradient twin (seed) from the
// same centered DFT map.
struct TvFlipSetup {
  RMat image;
  SamplingMap map;  // centered-layout DFT indices
  double eta = 0.0;
  std::uint64_t twin_seed = 1;
  SolverControls controls;
  std::string image_id;
};

struct TvFlipReport {
  FlipReport report;
  PermutedGradientImage twin;
};

TvFlipReport RunTvFlipTest(const TvFlipSetup& setup);

void WriteFlipReport(const std::string& path, const FlipReport& report);

}  // namespace asymcs
