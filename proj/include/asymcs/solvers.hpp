#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/levels.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

struct SolverControls {
  int max_iterations = 2000;
  // Stop once the relative fixed-point residual falls below this.
  double tolerance = 1e-6;
  int power_iterations = 20;
  // Step parameter; 0 selects it from the data.
  double step = 0.0;
  // Restrict the unknowns to real values (real images and real bases).
  bool real_coefficients = false;
  // Record one log row every `log_every` iterations (0 disables the log).
  int log_every = 1;
};

enum class Regularizer { kL1, kWeightedL1 };

// min sum_i w_i |z_i|  s.t.  ‖y - P_Omega U z‖₂ <= eta.
//
// `op` maps coefficients to the full measurement grid and `omega` lists the
// sampled rows in increasing order. When `op` is a square isometry the
// constraint set has a closed-form projection and the solver uses it;
// otherwise it falls back to the general primal-dual iteration with steps
// from a power-iteration estimate of ‖P_Omega U‖.
struct RecoveryProblem {
  Operator op;
  std::vector<Index> omega;
  Vec y;
  double eta = 0.0;
  Regularizer regularizer = Regularizer::kL1;
  RVec weights;  // kWeightedL1 only, one per coefficient
  // Coefficients -> signal, used for the reconstruction and the error.
  std::optional<Operator> synthesis;
  std::optional<Vec> truth;  // signal-space ground truth
  SolverControls controls;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0;
  double residual = 0;
  double best_objective = 0;
};

struct RecoveryResult {
  Vec estimate;
  Vec reconstruction;
  double residual = 0;
  double objective = 0;
  int iterations = 0;
  bool converged = false;
  std::optional<double> relative_error;  // percent
  // ‖Im(reconstruction)‖² / ‖reconstruction‖², for real-signal experiments
  // that keep the real part.
  double imaginary_energy = 0;
  std::vector<IterationRecord> log;
  int threads = 1;
};

// The solvers run the iteration to completion and flag non-convergence in the
// result instead of throwing; the best feasible iterate is returned.
RecoveryResult SolveL1(const RecoveryProblem& problem);
RecoveryResult SolveWeightedL1(const RecoveryProblem& problem);

// One weight per coefficient from per-level weights w_k = base^k (k = 0 for
// the first level).
RVec LevelWeights(const LevelStructure& levels, double base);

// Isotropic TV with forward differences and replicated edges (the difference
// across the last row/column is zero).
double TotalVariation(const RMat& image);
// Gradient magnitudes ‖∇x(i, j)‖₂, row-major.
RVec GradientMagnitudes(const RMat& image);

// min TV(x)  s.t.  ‖y - P_Omega F x‖₂ <= eta, with F the unitary 2D DFT in
// centered layout (DC at (n/2, n/2)). With real_image the unknown is real and
// the conjugate-mirror measurements implied by realness are added.
struct TvProblem {
  Index n = 0;
  std::vector<Index> omega;  // centered-layout frequency indices
  Vec y;
  double eta = 0.0;
  bool real_image = true;
  std::optional<Vec> truth;
  SolverControls controls;
};

RecoveryResult SolveTv(const TvProblem& problem);

// Samples P_Omega U x for a coefficient or signal vector.
Vec Measure(const Operator& op, const std::vector<Index>& omega, const Vec& x);

void WriteIterationLog(const std::string& path, const RecoveryResult& result);

}  // namespace asymcs
