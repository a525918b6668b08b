#pragma once

#include <string>
#include <vector>

#include "asymcs/core.hpp"
#include "asymcs/levels.hpp"
#include "asymcs/transforms.hpp"

namespace asymcs {

// s_k(eps): the smallest L such that the L largest-magnitude coefficients of
// band k carry at least a fraction eps of the band's l2 norm. Zero for an
// identically zero band. Equal magnitudes are taken lowest index first.
std::vector<Index> LocalSparsity(const Vec& coeffs, const LevelStructure& levels,
                                 double epsilon);

struct SparsityProfile {
  LevelStructure levels;
  std::vector<double> epsilons;
  // s(e, k) and s(e, k) / width(k), one row per epsilon.
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> s;
  RMat relative;
};

SparsityProfile SparsityCurveFromCoefficients(const Vec& coeffs,
                                              const LevelStructure& levels,
                                              const std::vector<double>& epsilons);

// Wavelet-analyzes a square image (row-major vector) and profiles each scale.
// Level 0 is the scaling block; levels 1.. are the detail scales, coarse to
// fine.
SparsityProfile SparsityCurve(const Vec& image, const Shape& shape,
                              const WaveletSpec& wavelet,
                              const std::vector<double>& epsilons);

// Columns: scale k, eps, s_k, relative.
void WriteSparsityCsv(const std::string& path, const SparsityProfile& profile);

struct LevelSparsityCheck {
  bool sparse = true;
  std::vector<Index> counts;    // |supp| per band
  std::vector<Index> overflow;  // max(0, counts - budget) per band
};

// (s, M)-sparsity: every band's support (|x_i| > threshold) has at most s_k
// entries.
LevelSparsityCheck IsSparseInLevels(const Vec& coeffs, const LevelStructure& levels,
                                    const std::vector<Index>& budgets,
                                    double threshold = 0.0);

}  // namespace asymcs
